//! Compensated summation.

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl Extend<f64> for NeumaierSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

/// Compensated sum of a slice.
pub fn accurate_sum(xs: &[f64]) -> f64 {
    let mut s = NeumaierSum::new();
    s.extend(xs.iter().copied());
    s.value()
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        accurate_sum(xs) / xs.len() as f64
    }
}

/// Population variance (divides by `len`).
pub fn population_variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    let mut s = NeumaierSum::new();
    s.extend(xs.iter().map(|x| (x - m) * (x - m)));
    s.value() / xs.len() as f64
}

/// Unbiased sample variance (divides by `len - 1`); zero below two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    population_variance(xs) * xs.len() as f64 / (xs.len() - 1) as f64
}
