//! Per-action CSV files, feature standardization and windowed dataset
//! construction.
//!
//! Segmentation follows the random-overlap scheme: with
//! `max_overlap = win/2` and `min_overlap = min(20, win/4)`, each step
//! draws an overlap uniformly from `[min_overlap, max_overlap]` and
//! advances by `win - overlap`; a window's label is the label of its
//! first row.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::container::{Tensor, TensorFile};
use crate::dsp::FeatureVector;
use crate::error::{Error, Result};
use crate::label::{ActionLabel, FEATURE_DIM, NUM_CLASSES};
use crate::transport::format_sig9;

pub type Row = [f64; FEATURE_DIM];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledRecord {
    pub index: u64,
    pub features: Row,
    pub label: ActionLabel,
}

fn header(with_truth: bool) -> String {
    let mut h = String::from("index");
    for i in 1..=FEATURE_DIM {
        h.push_str(&format!(",f{i}"));
    }
    if with_truth {
        h.push_str(",truth");
    }
    h
}

fn row_line(index: u64, values: &Row, truth: Option<ActionLabel>) -> String {
    let mut line = index.to_string();
    for v in values {
        line.push(',');
        line.push_str(&format_sig9(*v));
    }
    if let Some(t) = truth {
        line.push(',');
        line.push_str(&t.index().to_string());
    }
    line
}

fn open_for_append(path: &Path, with_truth: bool) -> Result<std::io::BufWriter<std::fs::File>> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let f = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = std::io::BufWriter::new(f);
    if fresh {
        writeln!(w, "{}", header(with_truth))?;
    }
    Ok(w)
}

/// Appends `index,f1..f20` rows, writing the header if the file is new.
pub fn append_records(path: impl AsRef<Path>, records: &[LabeledRecord]) -> Result<()> {
    let mut w = open_for_append(path.as_ref(), false)?;
    for r in records {
        writeln!(w, "{}", row_line(r.index, &r.features, None))?;
    }
    w.flush()?;
    Ok(())
}

/// Appends feature frames; a `truth` column is written when the first
/// frame of a new file carries one.
pub fn append_features(path: impl AsRef<Path>, frames: &[FeatureVector]) -> Result<()> {
    let with_truth = frames.first().is_some_and(|f| f.truth.is_some());
    let mut w = open_for_append(path.as_ref(), with_truth)?;
    for f in frames {
        writeln!(w, "{}", row_line(f.index, &f.values, f.truth.map(|s| s.action())))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an action file and tags every row with `label`. Accepts an
/// optional header and an optional trailing truth column.
pub fn load_action_file(path: impl AsRef<Path>, label: ActionLabel) -> Result<Vec<LabeledRecord>> {
    let path = path.as_ref();
    let reader = BufReader::new(std::fs::File::open(path)?);
    let err = |line: usize, msg: String| Error::Load { path: path.to_path_buf(), line, msg };
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() || (lineno == 1 && line.starts_with("index")) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != FEATURE_DIM + 1 && fields.len() != FEATURE_DIM + 2 {
            return Err(err(lineno, format!("expected {} features, found {}", FEATURE_DIM, fields.len() - 1)));
        }
        let index = fields[0].trim().parse::<u64>().map_err(|_| err(lineno, format!("bad index {:?}", fields[0])))?;
        let mut features = [0.0; FEATURE_DIM];
        for (slot, f) in features.iter_mut().zip(&fields[1..=FEATURE_DIM]) {
            *slot = match f.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => v,
                _ => return Err(err(lineno, format!("bad value {f:?}"))),
            };
        }
        out.push(LabeledRecord { index, features, label });
    }
    Ok(out)
}

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Columns with zero variance; their std is clamped to 1 and they
    /// standardize to zero.
    pub degenerate: Vec<bool>,
}

impl Standardizer {
    pub fn fit(rows: &[Row]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Empty("standardization needs at least two rows"));
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; FEATURE_DIM];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = [0.0; FEATURE_DIM];
        for r in rows {
            for j in 0..FEATURE_DIM {
                let d = r[j] - mean[j];
                var[j] += d * d;
            }
        }
        let mut std = Vec::with_capacity(FEATURE_DIM);
        let mut degenerate = Vec::with_capacity(FEATURE_DIM);
        for j in 0..FEATURE_DIM {
            let s = (var[j] / n).sqrt();
            let flat = s <= 1e-12 * mean[j].abs().max(1.0);
            degenerate.push(flat);
            std.push(if flat { 1.0 } else { s });
        }
        Ok(Self { mean, std, degenerate })
    }

    pub fn apply(&self, row: &Row) -> Row {
        std::array::from_fn(|j| if self.degenerate[j] { 0.0 } else { (row[j] - self.mean[j]) / self.std[j] })
    }

    pub fn any_degenerate(&self) -> bool {
        self.degenerate.iter().any(|d| *d)
    }
}

pub fn standardize(rows: &[Row]) -> Result<(Vec<Row>, Standardizer)> {
    let s = Standardizer::fit(rows)?;
    Ok((rows.iter().map(|r| s.apply(r)).collect(), s))
}

/// How consecutive windows overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapMode {
    /// Overlap drawn per step from `[min(20, win/4), win/2]`.
    Random,
    /// Back-to-back windows (step = win).
    None,
}

/// Overlap bounds `(min, max)` for a window size.
pub fn overlap_bounds(win_size: usize) -> (usize, usize) {
    (20.min(win_size / 4), win_size / 2)
}

/// Window start offsets for a stream of `n` rows.
pub fn window_starts<R: Rng>(n: usize, win_size: usize, mode: OverlapMode, rng: &mut R) -> Result<Vec<usize>> {
    if win_size < 4 {
        return Err(Error::Config(format!("window size {win_size} must be at least 4")));
    }
    let (min_overlap, max_overlap) = overlap_bounds(win_size);
    let mut starts = Vec::new();
    let mut start = 0;
    while start + win_size <= n {
        let overlap = match mode {
            OverlapMode::Random => rng.random_range(min_overlap..=max_overlap),
            OverlapMode::None => 0,
        };
        starts.push(start);
        start += win_size - overlap;
    }
    Ok(starts)
}

/// Cuts `rows` into `win_size x 20` windows labelled by their first row.
pub fn segment_dataset<R: Rng>(
    rows: &[Row],
    labels: &[ActionLabel],
    win_size: usize,
    mode: OverlapMode,
    rng: &mut R,
) -> Result<(Vec<Array2<f64>>, Vec<ActionLabel>)> {
    if rows.len() != labels.len() {
        return Err(Error::dim(format!("{} labels", rows.len()), format!("{} labels", labels.len())));
    }
    let starts = window_starts(rows.len(), win_size, mode, rng)?;
    let windows = starts.iter().map(|&s| rows_to_array(&rows[s..s + win_size])).collect();
    let window_labels = starts.iter().map(|&s| labels[s]).collect();
    Ok((windows, window_labels))
}

pub fn rows_to_array(rows: &[Row]) -> Array2<f64> {
    Array2::from_shape_fn((rows.len(), FEATURE_DIM), |(i, j)| rows[i][j])
}

/// Per-file segmentation seed. SplitMix64 finalizer over `(seed, label, file ordinal)`.
pub fn derive_seed(seed: u64, label: ActionLabel, ordinal: usize) -> u64 {
    let mut z = seed
        ^ (label.index() as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (ordinal as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One classifier input.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowTensor {
    pub data: Array2<f64>,
    pub label: ActionLabel,
}

impl WindowTensor {
    pub fn one_hot(&self) -> [f64; NUM_CLASSES] {
        self.label.one_hot()
    }

    /// Row-major `1 x (win * 20)` view of the window.
    pub fn flattened(&self) -> Vec<f64> {
        self.data.iter().copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub win_size: usize,
    pub test_fraction: f64,
    pub seed: u64,
    pub overlap: OverlapMode,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { win_size: 80, test_fraction: 0.2, seed: 0, overlap: OverlapMode::Random }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub train: Vec<WindowTensor>,
    pub test: Vec<WindowTensor>,
    pub standardizer: Standardizer,
    pub win_size: usize,
    /// Windows per class before splitting, indexed by label.
    pub windows_per_class: [usize; NUM_CLASSES],
    /// Rows per class before windowing.
    pub rows_per_class: [usize; NUM_CLASSES],
}

/// Loads every `(path, label)` file, standardizes with statistics from the
/// combined rows, segments each file separately and makes a stratified
/// shuffled split.
pub fn build_split(files: &[(PathBuf, ActionLabel)], cfg: &SplitConfig) -> Result<SplitDataset> {
    build_split_with(files, cfg, None)
}

/// As [`build_split`], but reusing a stored standardizer when given.
pub fn build_split_with(
    files: &[(PathBuf, ActionLabel)],
    cfg: &SplitConfig,
    standardizer: Option<&Standardizer>,
) -> Result<SplitDataset> {
    if !(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0) {
        let split = if cfg.test_fraction <= 0.0 { "test" } else { "train" };
        return Err(Error::Stratification { class: "all", split });
    }
    let mut per_file = Vec::with_capacity(files.len());
    for (path, label) in files {
        per_file.push((load_action_file(path, *label)?, *label));
    }
    let all_rows: Vec<Row> = per_file.iter().flat_map(|(recs, _)| recs.iter().map(|r| r.features)).collect();
    let standardizer = match standardizer {
        Some(s) => s.clone(),
        None => Standardizer::fit(&all_rows)?,
    };

    let mut by_class: [Vec<WindowTensor>; NUM_CLASSES] = Default::default();
    let mut rows_per_class = [0; NUM_CLASSES];
    let mut ordinals = [0usize; NUM_CLASSES];
    for (recs, label) in &per_file {
        let rows: Vec<Row> = recs.iter().map(|r| standardizer.apply(&r.features)).collect();
        let labels = vec![*label; rows.len()];
        let ordinal = &mut ordinals[label.index()];
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, *label, *ordinal));
        *ordinal += 1;
        let (windows, wl) = segment_dataset(&rows, &labels, cfg.win_size, cfg.overlap, &mut rng)?;
        rows_per_class[label.index()] += rows.len();
        by_class[label.index()].extend(windows.into_iter().zip(wl).map(|(data, label)| WindowTensor { data, label }));
    }

    let windows_per_class = std::array::from_fn(|c| by_class[c].len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (c, mut windows) in by_class.into_iter().enumerate() {
        let class = ActionLabel::from_index(c).unwrap().name();
        windows.shuffle(&mut rng);
        let n_test = (windows.len() as f64 * cfg.test_fraction).round() as usize;
        if n_test == 0 {
            return Err(Error::Stratification { class, split: "test" });
        }
        if n_test >= windows.len() {
            return Err(Error::Stratification { class, split: "train" });
        }
        let rest = windows.split_off(n_test);
        test.extend(windows);
        train.extend(rest);
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok(SplitDataset { train, test, standardizer, win_size: cfg.win_size, windows_per_class, rows_per_class })
}

/// Conventional file name for an action's recordings.
pub fn action_file_name(label: ActionLabel) -> String {
    format!("{}.csv", label.name())
}

/// Finds the three per-action files in `dir`.
pub fn action_files_in(dir: impl AsRef<Path>) -> Result<Vec<(PathBuf, ActionLabel)>> {
    ActionLabel::ALL
        .iter()
        .map(|&l| {
            let p = dir.as_ref().join(action_file_name(l));
            if p.is_file() {
                Ok((p, l))
            } else {
                Err(Error::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("missing action file {}", p.display()),
                )))
            }
        })
        .collect()
}

fn windows_tensor(name: &str, windows: &[WindowTensor], win: usize) -> [Tensor; 2] {
    let data = windows.iter().flat_map(|w| w.data.iter().copied()).collect();
    let labels = windows.iter().map(|w| w.label.index() as f64).collect();
    [
        Tensor::new(format!("{name}.x"), vec![windows.len(), win, FEATURE_DIM], data),
        Tensor::new(format!("{name}.y"), vec![windows.len()], labels),
    ]
}

fn windows_from(file: &TensorFile, name: &str, win: usize) -> Result<Vec<WindowTensor>> {
    let x = file.get(&format!("{name}.x"))?;
    let y = file.get(&format!("{name}.y"))?;
    if x.shape.len() != 3 || x.shape[1] != win || x.shape[2] != FEATURE_DIM || y.shape != [x.shape[0]] {
        return Err(Error::Container(format!("bad shape for {name}: {:?} / {:?}", x.shape, y.shape)));
    }
    x.data
        .chunks_exact(win * FEATURE_DIM)
        .zip(&y.data)
        .map(|(chunk, l)| {
            let label =
                ActionLabel::from_index(*l as usize).ok_or_else(|| Error::Container(format!("bad label {l}")))?;
            Ok(WindowTensor { data: Array2::from_shape_vec((win, FEATURE_DIM), chunk.to_vec()).unwrap(), label })
        })
        .collect()
}

impl SplitDataset {
    /// Container with `train.x/y`, `test.x/y`, `standardizer.mean/std`
    /// and the window size and per-class counts in the metadata.
    pub fn to_container(&self) -> TensorFile {
        let mut tensors = Vec::new();
        tensors.extend(windows_tensor("train", &self.train, self.win_size));
        tensors.extend(windows_tensor("test", &self.test, self.win_size));
        tensors.push(Tensor::new("standardizer.mean", vec![FEATURE_DIM], self.standardizer.mean.clone()));
        tensors.push(Tensor::new("standardizer.std", vec![FEATURE_DIM], self.standardizer.std.clone()));
        TensorFile {
            meta: serde_json::json!({
                "kind": "split_dataset",
                "win_size": self.win_size,
                "degenerate": self.standardizer.degenerate,
                "windows_per_class": self.windows_per_class,
                "rows_per_class": self.rows_per_class,
            }),
            tensors,
        }
    }

    pub fn from_container(file: &TensorFile) -> Result<Self> {
        let meta = &file.meta;
        if meta["kind"] != "split_dataset" {
            return Err(Error::Container("not a split dataset".into()));
        }
        let parse = |v: &serde_json::Value| -> Result<[usize; NUM_CLASSES]> {
            serde_json::from_value(v.clone()).map_err(Error::from)
        };
        let win = meta["win_size"].as_u64().ok_or_else(|| Error::Container("missing win_size".into()))? as usize;
        Ok(Self {
            train: windows_from(file, "train", win)?,
            test: windows_from(file, "test", win)?,
            standardizer: Standardizer {
                mean: file.get("standardizer.mean")?.data.clone(),
                std: file.get("standardizer.std")?.data.clone(),
                degenerate: serde_json::from_value(meta["degenerate"].clone())?,
            },
            win_size: win,
            windows_per_class: parse(&meta["windows_per_class"])?,
            rows_per_class: parse(&meta["rows_per_class"])?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use tempfile::tempdir;

    fn random_rows(n: usize, seed: u64) -> Vec<Row> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| std::array::from_fn(|j| rng.random_range(-3.0..3.0) * (j + 1) as f64 + j as f64)).collect()
    }

    fn records(n: usize, seed: u64, label: ActionLabel) -> Vec<LabeledRecord> {
        random_rows(n, seed)
            .into_iter()
            .enumerate()
            .map(|(i, features)| LabeledRecord { index: i as u64, features, label })
            .collect()
    }

    #[test]
    fn csv_round_trip_to_nine_digits() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("shakeHands.csv");
        let recs = records(100, 1, ActionLabel::ShakeHands);
        append_records(&path, &recs[..40]).unwrap();
        append_records(&path, &recs[40..]).unwrap();
        let back = load_action_file(&path, ActionLabel::ShakeHands).unwrap();
        assert_eq!(back.len(), 100);
        for (a, b) in recs.iter().zip(&back) {
            assert_eq!(a.index, b.index);
            assert_eq!(b.label, ActionLabel::ShakeHands);
            for (x, y) in a.features.iter().zip(&b.features) {
                assert!((x - y).abs() <= 5e-9 * x.abs().max(1e-300) * 1.000001);
            }
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("index")).count(), 1);
    }

    #[test]
    fn empty_file_loads_empty() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("e.csv");
        std::fs::write(&path, "").unwrap();
        assert!(load_action_file(&path, ActionLabel::StayIdle).unwrap().is_empty());
    }

    #[test]
    fn short_row_reports_line_number() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        append_records(&path, &records(3, 2, ActionLabel::PickUpCup)).unwrap();
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str(&format!("3{}\n", ",0.5".repeat(19)));
        std::fs::write(&path, text).unwrap();
        match load_action_file(&path, ActionLabel::PickUpCup) {
            Err(Error::Load { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn feature_csv_keeps_truth_column() {
        use crate::label::BrainState;
        let dir = tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let frames: Vec<FeatureVector> = (0..3)
            .map(|i| FeatureVector { index: i, values: [0.05; FEATURE_DIM], truth: Some(BrainState::Idle) })
            .collect();
        append_features(&path, &frames).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().next().unwrap().ends_with(",truth"));
        assert!(text.lines().nth(1).unwrap().ends_with(",2"));
        assert_eq!(load_action_file(&path, ActionLabel::StayIdle).unwrap().len(), 3);
    }

    #[test]
    fn standardized_columns_have_zero_mean_unit_std() {
        let (x, s) = standardize(&random_rows(1000, 3)).unwrap();
        assert!(!s.any_degenerate());
        for j in 0..FEATURE_DIM {
            let mean = x.iter().map(|r| r[j]).sum::<f64>() / 1000.0;
            let std = (x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / 1000.0).sqrt();
            assert!(mean.abs() < 1e-9);
            assert!((std - 1.0).abs() < 1e-9);
        }
        let (y, _) = standardize(&x).unwrap();
        for (a, b) in x.iter().zip(&y) {
            for j in 0..FEATURE_DIM {
                assert!((a[j] - b[j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn constant_column_is_flagged() {
        let mut rows = random_rows(50, 4);
        rows.iter_mut().for_each(|r| r[3] = 7.25);
        let (x, s) = standardize(&rows).unwrap();
        assert!(s.degenerate[3]);
        assert_eq!(s.std[3], 1.0);
        assert!(x.iter().all(|r| r[3] == 0.0));
        assert_eq!(s.degenerate.iter().filter(|d| **d).count(), 1);
    }

    #[test]
    fn standardize_needs_two_rows() {
        assert!(standardize(&random_rows(1, 0)).is_err());
    }

    #[test]
    fn exact_fit_gives_one_window() {
        let rows = random_rows(100, 5);
        let mut labels = vec![ActionLabel::StayIdle; 100];
        labels[0] = ActionLabel::PickUpCup;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (w, l) = segment_dataset(&rows, &labels, 100, OverlapMode::Random, &mut rng).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(l, vec![ActionLabel::PickUpCup]);
        assert_eq!(w[0].dim(), (100, FEATURE_DIM));
    }

    #[test]
    fn short_input_gives_no_windows() {
        let rows = random_rows(99, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (w, _) = segment_dataset(&rows, &[ActionLabel::StayIdle; 99], 100, OverlapMode::Random, &mut rng).unwrap();
        assert!(w.is_empty());
        assert!(segment_dataset(&rows[..3], &[ActionLabel::StayIdle; 3], 3, OverlapMode::Random, &mut rng).is_err());
    }

    #[test]
    fn table_sized_input_window_count_in_bounds() {
        let rows = random_rows(13697, 6);
        let labels = vec![ActionLabel::ShakeHands; rows.len()];
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (w, l) = segment_dataset(&rows, &labels, 100, OverlapMode::Random, &mut rng).unwrap();
            assert!((136..=271).contains(&w.len()), "{}", w.len());
            assert!(l.iter().all(|x| *x == ActionLabel::ShakeHands));
            assert_eq!(w[0].len(), 2000);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (w, _) = segment_dataset(&rows, &labels, 100, OverlapMode::None, &mut rng).unwrap();
        assert_eq!(w.len(), 136);
    }

    proptest! {
        #[test]
        fn steps_stay_within_overlap_bounds(n in 0usize..3000, win in 4usize..160, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let starts = window_starts(n, win, OverlapMode::Random, &mut rng).unwrap();
            let (lo, hi) = overlap_bounds(win);
            for pair in starts.windows(2) {
                let step = pair[1] - pair[0];
                prop_assert!(step >= win - hi && step <= win - lo);
            }
            if let Some(last) = starts.last() {
                prop_assert!(last + win <= n);
                prop_assert!(last + win + (win - lo) > n);
            } else {
                prop_assert!(n < win);
            }
        }
    }

    fn write_class_files(dir: &Path, rows: [usize; 3]) -> Vec<(PathBuf, ActionLabel)> {
        ActionLabel::ALL
            .iter()
            .zip(rows)
            .map(|(&l, n)| {
                let p = dir.join(action_file_name(l));
                append_records(&p, &records(n, l.index() as u64 + 10, l)).unwrap();
                (p, l)
            })
            .collect()
    }

    #[test]
    fn split_is_stratified_and_reproducible() {
        let dir = tempdir().unwrap();
        let files = write_class_files(dir.path(), [900, 1200, 1000]);
        let cfg = SplitConfig { win_size: 40, test_fraction: 0.25, seed: 9, overlap: OverlapMode::Random };
        let a = build_split(&files, &cfg).unwrap();
        let b = build_split(&files, &cfg).unwrap();
        assert_eq!(a, b);
        for l in ActionLabel::ALL {
            let tr = a.train.iter().filter(|w| w.label == l).count();
            let te = a.test.iter().filter(|w| w.label == l).count();
            assert!(tr > 0 && te > 0);
            assert_eq!(tr + te, a.windows_per_class[l.index()]);
        }
        assert!(a.train.iter().chain(&a.test).all(|w| w.data.dim() == (40, FEATURE_DIM)));
        assert_eq!(a.rows_per_class, [900, 1200, 1000]);

        let c = build_split(&files, &SplitConfig { seed: 10, ..cfg }).unwrap();
        assert_ne!(a.train, c.train);
    }

    #[test]
    fn split_uses_combined_statistics() {
        let dir = tempdir().unwrap();
        let files = write_class_files(dir.path(), [300, 300, 300]);
        let split = build_split(&files, &SplitConfig { win_size: 20, ..SplitConfig::default() }).unwrap();
        let mut all = Vec::new();
        for (p, l) in &files {
            all.extend(load_action_file(p, *l).unwrap().into_iter().map(|r| r.features));
        }
        assert_eq!(split.standardizer, Standardizer::fit(&all).unwrap());
    }

    #[test]
    fn zero_test_fraction_is_a_stratification_error() {
        let dir = tempdir().unwrap();
        let files = write_class_files(dir.path(), [300, 300, 300]);
        let cfg = SplitConfig { test_fraction: 0.0, ..SplitConfig::default() };
        assert!(matches!(build_split(&files, &cfg), Err(Error::Stratification { split: "test", .. })));
    }

    #[test]
    fn tiny_class_fails_stratification() {
        let dir = tempdir().unwrap();
        let files = write_class_files(dir.path(), [300, 300, 85]);
        let cfg = SplitConfig { win_size: 80, test_fraction: 0.2, ..SplitConfig::default() };
        assert!(matches!(build_split(&files, &cfg), Err(Error::Stratification { .. })));
    }

    #[test]
    fn container_round_trip() {
        let dir = tempdir().unwrap();
        let files = write_class_files(dir.path(), [400, 400, 400]);
        let split = build_split(&files, &SplitConfig { win_size: 16, ..SplitConfig::default() }).unwrap();
        let path = dir.path().join("split.bin");
        split.to_container().save(&path).unwrap();
        let back = SplitDataset::from_container(&TensorFile::load(&path).unwrap()).unwrap();
        assert_eq!(back, split);
    }
}
