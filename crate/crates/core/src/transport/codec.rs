use crate::dsp::FeatureVector;
use crate::error::{Error, Result};
use crate::label::FEATURE_DIM;

/// Receive buffer size; every legal frame encodes to at most this many bytes.
pub const MAX_DATAGRAM: usize = 1024;

const SIG_DIGITS: i32 = 9;

/// Index plus flattened feature values, as sent over UDP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureFrame {
    pub index: u64,
    pub values: [f64; FEATURE_DIM],
}

impl From<&FeatureVector> for FeatureFrame {
    fn from(fv: &FeatureVector) -> Self {
        Self { index: fv.index, values: fv.values }
    }
}

/// Formats a finite value with 9 significant digits: fixed notation for
/// magnitudes in `[1e-5, 1e9)`, scientific otherwise. Zero is `0.00000000`.
pub fn format_sig9(v: f64) -> String {
    debug_assert!(v.is_finite());
    if v == 0.0 {
        return "0.00000000".to_string();
    }
    // exponent after rounding to 9 digits, so 9.9999999996 counts as 1e1
    let sci = format!("{v:.8e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..9).contains(&exp) {
        let decimals = (SIG_DIGITS - 1 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        sci
    }
}

/// `"i,v1,...,v20"` in ASCII.
pub fn encode_frame(f: &FeatureFrame) -> Result<Vec<u8>> {
    if let Some(position) = f.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Encode { index: f.index, position });
    }
    let mut s = f.index.to_string();
    for v in &f.values {
        s.push(',');
        s.push_str(&format_sig9(*v));
    }
    debug_assert!(s.len() <= MAX_DATAGRAM);
    Ok(s.into_bytes())
}

pub fn decode_frame(bytes: &[u8]) -> Result<FeatureFrame> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::FrameFormat("payload is not ASCII".into()))?;
    let fields: Vec<&str> = text.split(',').collect();
    if fields.len() != FEATURE_DIM + 1 {
        return Err(Error::FrameFormat(format!("expected {} fields, got {}", FEATURE_DIM + 1, fields.len())));
    }
    let idx_field = fields[0];
    if idx_field.is_empty() || !idx_field.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::FrameFormat(format!("bad frame index {idx_field:?}")));
    }
    let index =
        idx_field.parse::<u64>().map_err(|_| Error::FrameFormat(format!("frame index {idx_field:?} out of range")))?;
    let mut values = [0.0; FEATURE_DIM];
    for (slot, field) in values.iter_mut().zip(&fields[1..]) {
        *slot = match field.parse::<f64>() {
            Ok(v) if v.is_finite() => v,
            _ => return Err(Error::FrameFormat(format!("bad value {field:?}"))),
        };
    }
    Ok(FeatureFrame { index, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sig9_close(a: f64, b: f64) -> bool {
        a == b || (a - b).abs() <= 5e-9 * a.abs().max(b.abs()) * (1.0 + 1e-9)
    }

    #[test]
    fn zero_frame_layout() {
        let f = FeatureFrame { index: 0, values: [0.0; FEATURE_DIM] };
        let s = String::from_utf8(encode_frame(&f).unwrap()).unwrap();
        assert!(s.starts_with("0,0.00000000,"));
        assert_eq!(s.split(',').count(), 21);
    }

    #[test]
    fn formats_nine_significant_digits() {
        assert_eq!(format_sig9(0.123456789012), "0.123456789");
        assert_eq!(format_sig9(1.0), "1.00000000");
        assert_eq!(format_sig9(-12345.678901), "-12345.6789");
        assert_eq!(format_sig9(1.5e-7), "1.50000000e-7");
        assert_eq!(format_sig9(-2.5e300), "-2.50000000e300");
    }

    #[test]
    fn worst_case_length_fits_buffer() {
        // longest field: sign + 9 digits + point + 'e' + '-' + 3 exponent digits
        let f = FeatureFrame { index: u64::MAX, values: [-1.234_567_89e-300; FEATURE_DIM] };
        let n = encode_frame(&f).unwrap().len();
        assert!(n <= 20 + 20 * 17 + 20);
        assert!(n <= MAX_DATAGRAM);
        let f = FeatureFrame { index: u64::MAX, values: [-0.000_012_345_678_9; FEATURE_DIM] };
        assert!(encode_frame(&f).unwrap().len() <= MAX_DATAGRAM);
    }

    #[test]
    fn rejects_non_finite() {
        let mut f = FeatureFrame { index: 3, values: [0.5; FEATURE_DIM] };
        f.values[7] = f64::NAN;
        assert!(matches!(encode_frame(&f), Err(Error::Encode { index: 3, position: 7 })));
    }

    #[test]
    fn decodes_written_values() {
        let payload = format!("5{}", ",0.1".repeat(20));
        let f = decode_frame(payload.as_bytes()).unwrap();
        assert_eq!(f.index, 5);
        assert_eq!(f.values, [0.1; FEATURE_DIM]);
    }

    #[test]
    fn malformed_payloads_rejected() {
        let good = format!("5{}", ",0.1".repeat(20));
        let truncated = &good[..good.len() - 6];
        assert!(matches!(decode_frame(truncated.as_bytes()), Err(Error::FrameFormat(_))));
        let extra = format!("{good},0.2");
        assert!(decode_frame(extra.as_bytes()).is_err());
        for bad in ["-5", "5.0", "", "x", "99999999999999999999999"] {
            let p = format!("{bad}{}", ",0.1".repeat(20));
            assert!(decode_frame(p.as_bytes()).is_err(), "{bad}");
        }
        let nan = format!("1,NaN{}", ",0.1".repeat(19));
        assert!(decode_frame(nan.as_bytes()).is_err());
        assert!(decode_frame(&[0xff, 0xfe]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_to_nine_digits(
            index in any::<u64>(),
            values in proptest::array::uniform20(prop_oneof![
                -1e12f64..1e12,
                0.0f64..1.0,
                proptest::num::f64::NORMAL,
            ]),
        ) {
            let f = FeatureFrame { index, values };
            let bytes = encode_frame(&f).unwrap();
            prop_assert!(bytes.len() <= MAX_DATAGRAM);
            let g = decode_frame(&bytes).unwrap();
            prop_assert_eq!(g.index, index);
            for (a, b) in f.values.iter().zip(&g.values) {
                prop_assert!(sig9_close(*a, *b), "{} vs {}", a, b);
            }
            // decoded values already sit on the 9-digit grid
            prop_assert_eq!(encode_frame(&g).unwrap(), bytes);
        }
    }
}
