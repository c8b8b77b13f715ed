//! Session clocks. Session time can run faster than wall time so long
//! scripted sessions finish quickly; all cadences are expressed in session
//! time.

use std::time::{Duration, Instant};

pub trait Clock: Send + Sync {
    /// Session time since the clock started.
    fn now(&self) -> Duration;

    /// Wall time needed for `session` to elapse.
    fn to_wall(&self, session: Duration) -> Duration;

    fn sleep_until(&self, t: Duration) {
        let now = self.now();
        if t > now {
            std::thread::sleep(self.to_wall(t - now));
        }
    }
}

/// Wall clock multiplied by a constant factor (1.0 = real time).
#[derive(Debug, Clone, Copy)]
pub struct ScaledClock {
    start: Instant,
    scale: f64,
}

impl ScaledClock {
    pub fn new(scale: f64) -> Self {
        assert!(scale > 0.0 && scale.is_finite(), "clock scale must be positive");
        Self { start: Instant::now(), scale }
    }

    pub fn starting_at(start: Instant, scale: f64) -> Self {
        Self { start, ..Self::new(scale) }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl Clock for ScaledClock {
    fn now(&self) -> Duration {
        self.start.elapsed().mul_f64(self.scale)
    }

    fn to_wall(&self, session: Duration) -> Duration {
        session.div_f64(self.scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_clock_runs_fast() {
        let c = ScaledClock::new(50.0);
        std::thread::sleep(Duration::from_millis(20));
        assert!(c.now() >= Duration::from_millis(1000));
        assert_eq!(c.to_wall(Duration::from_secs(5)), Duration::from_millis(100));
    }
}
