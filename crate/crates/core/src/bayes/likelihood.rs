use crate::error::{invalid, Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Tabulated `p(x | theta)` over the detection window.
///
/// The density is piecewise linear between grid points and normalised with
/// the trapezoid rule; the cumulative distribution is its exact integral.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodTable {
    x: Vec<f64>,
    values: Vec<f64>,
    cdf: Vec<f64>,
}

impl LikelihoodTable {
    /// Normalise non-negative samples of an unnormalised density.
    pub fn from_unnormalized(x: Vec<f64>, raw: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || x.len() != raw.len() {
            return Err(invalid("likelihood table needs matching x and value arrays"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("likelihood grid must be strictly increasing"));
        }
        if raw.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::NumericalConsistency("likelihood values must be finite and non-negative".into()));
        }
        let mut cdf = Vec::with_capacity(x.len());
        cdf.push(0.0);
        let mut acc = 0.0;
        for i in 1..x.len() {
            acc += 0.5 * (raw[i] + raw[i - 1]) * (x[i] - x[i - 1]);
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(invalid("interference density vanishes over the whole window"));
        }
        let values = raw.iter().map(|v| v / acc).collect();
        for c in &mut cdf {
            *c /= acc;
        }
        *cdf.last_mut().expect("non-empty") = 1.0;
        Ok(Self { x, values, cdf })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// Trapezoid integral of the table (1 up to rounding).
    pub fn integral(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.x.len() {
            acc += 0.5 * (self.values[i] + self.values[i - 1]) * (self.x[i] - self.x[i - 1]);
        }
        acc
    }

    fn segment(&self, x: f64) -> Option<usize> {
        let n = self.x.len();
        if x < self.x[0] || x > self.x[n - 1] {
            return None;
        }
        let i = self.x.partition_point(|v| *v <= x);
        Some(i.clamp(1, n - 1) - 1)
    }

    /// Linearly interpolated density; zero outside the window.
    pub fn density(&self, x: f64) -> f64 {
        match self.segment(x) {
            None => 0.0,
            Some(i) => {
                let t = (x - self.x[i]) / (self.x[i + 1] - self.x[i]);
                self.values[i] + t * (self.values[i + 1] - self.values[i])
            }
        }
    }

    /// Exact distribution function of the piecewise-linear density.
    pub fn cdf_at(&self, x: f64) -> f64 {
        if x <= self.x[0] {
            return 0.0;
        }
        match self.segment(x) {
            None => 1.0,
            Some(i) => {
                let h = self.x[i + 1] - self.x[i];
                let t = (x - self.x[i]) / h;
                let (p0, p1) = (self.values[i], self.values[i + 1]);
                (self.cdf[i] + h * (p0 * t + 0.5 * (p1 - p0) * t * t)).min(1.0)
            }
        }
    }

    /// `int p ln p dx` with the same piecewise-linear interpolant, in nats.
    pub fn neg_entropy(&self) -> f64 {
        // Simpson on each cell; p ln p is smooth except where p touches zero.
        let plogp = |p: f64| if p > 0.0 { p * p.ln() } else { 0.0 };
        let mut acc = 0.0;
        for i in 1..self.x.len() {
            let (a, b) = (self.values[i - 1], self.values[i]);
            let h = self.x[i] - self.x[i - 1];
            acc += h / 6.0 * (plogp(a) + 4.0 * plogp(0.5 * (a + b)) + plogp(b));
        }
        acc
    }

    /// Invert the distribution function at `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.x.len();
        let i = self.cdf.partition_point(|c| *c <= u).clamp(1, n - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        let (p0, p1) = (self.values[i], self.values[i + 1]);
        let r = (u - self.cdf[i]).max(0.0);
        // Solve h (p0 t + (p1 - p0) t^2 / 2) = r in the cancellation-free form.
        let a = 0.5 * h * (p1 - p0);
        let b = h * p0;
        let disc = (b * b + 4.0 * a * r).max(0.0);
        let denom = b + disc.sqrt();
        let t = if denom > 0.0 { 2.0 * r / denom } else { 0.0 };
        self.x[i] + h * t.clamp(0.0, 1.0)
    }

    /// Draw `n` positions with the given generator.
    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.quantile(rng.gen::<f64>())).collect()
    }
}

/// Generator for realisation `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` i.i.d. draws from `table`, reproducible from `seed`.
pub fn sample_positions(table: &LikelihoodTable, n: usize, seed: u64) -> Vec<f64> {
    table.sample_with(n, &mut stream_rng(seed, 0))
}
