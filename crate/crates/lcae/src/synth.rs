//! Seeded two-class synthetic windows: each class is a fixed pair of
//! sinusoids; every window draws its own amplitude and time shift and gets
//! white noise on top.

use lcae_core::rng::SeededRng;
use lcae_core::{Mat, WindowSet};

/// `(cycles per window, amplitude, phase)` for each class.
const CLASS_COMPONENTS: [[(f64, f64, f64); 2]; 2] = [
    [(2.0, 1.0, 0.0), (5.0, 0.5, 0.3)],
    [(3.0, 1.0, 1.0), (7.0, 0.5, 2.0)],
];

pub const NUM_CLASSES: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftTask {
    pub window_len: usize,
    pub noise: f64,
    /// Time shifts are drawn from `[-jitter, jitter]` (in radians per cycle).
    pub jitter: f64,
    pub amplitude: (f64, f64),
    pub sample_rate_hz: f64,
}

impl Default for ShiftTask {
    fn default() -> Self {
        Self {
            window_len: 64,
            noise: 0.05,
            jitter: 0.3,
            amplitude: (0.8, 1.2),
            sample_rate_hz: 64.0,
        }
    }
}

impl ShiftTask {
    pub fn window(&self, class: usize, rng: &mut SeededRng) -> Vec<f64> {
        let a = rng.uniform(self.amplitude.0, self.amplitude.1);
        let shift = rng.uniform(-self.jitter, self.jitter);
        let n = self.window_len as f64;
        (0..self.window_len)
            .map(|t| {
                let clean: f64 = CLASS_COMPONENTS[class]
                    .iter()
                    .map(|&(f, amp, phase)| {
                        a * amp
                            * (2.0 * std::f64::consts::PI * f * t as f64 / n + phase + f * shift)
                                .sin()
                    })
                    .sum();
                clean + self.noise * rng.normal()
            })
            .collect()
    }

    /// `count` windows with uniformly drawn classes. The first `unlabeled`
    /// windows carry label −1; ids are `w0`, `w1`, ….
    pub fn training_set(&self, count: usize, unlabeled: usize, seed: u64) -> WindowSet {
        let mut rng = SeededRng::new(seed);
        let mut cols = Vec::with_capacity(count);
        let mut labels = Vec::with_capacity(count);
        for i in 0..count {
            let class = rng.below(NUM_CLASSES as u64) as usize;
            cols.push(self.window(class, &mut rng));
            labels.push(if i < unlabeled { -1 } else { class as i64 });
        }
        let ids = (0..count).map(|i| format!("w{i}")).collect();
        self.finish(cols, labels, ids)
    }

    /// `sequences` labeled sequences of `per_sequence` windows each, all
    /// windows of a sequence sharing its class and the id `seq<k>`.
    pub fn sequences(&self, sequences: usize, per_sequence: usize, seed: u64) -> WindowSet {
        let mut rng = SeededRng::new(seed);
        let mut cols = Vec::new();
        let mut labels = Vec::new();
        let mut ids = Vec::new();
        for k in 0..sequences {
            let class = rng.below(NUM_CLASSES as u64) as usize;
            for _ in 0..per_sequence {
                cols.push(self.window(class, &mut rng));
                labels.push(class as i64);
                ids.push(format!("seq{k}"));
            }
        }
        self.finish(cols, labels, ids)
    }

    fn finish(&self, cols: Vec<Vec<f64>>, labels: Vec<i64>, ids: Vec<String>) -> WindowSet {
        let x = if cols.is_empty() {
            Mat::zeros(self.window_len, 0)
        } else {
            Mat::from_columns(&cols).expect("windows share one length")
        };
        WindowSet::new(x, labels, self.sample_rate_hz, ids).expect("generated labels are valid")
    }
}
