use rayon::prelude::*;

/// A CDF tabulated on a uniform grid and interpolated by cubic Hermite
/// polynomials with the density as derivative.
///
/// Outside the grid the boundary values are returned, so the table should
/// span the region where the law has non-negligible mass.
#[derive(Debug, Clone)]
pub struct CdfTable {
    start: f64,
    step: f64,
    cdf: Vec<f64>,
    pdf: Vec<f64>,
}

impl CdfTable {
    /// Evaluates `cdf` and `pdf` at `nodes ≥ 2` equally spaced points of
    /// `[lo, hi]` in parallel. A non-finite density at a node switches its
    /// neighbouring intervals to linear interpolation.
    pub fn build(
        lo: f64,
        hi: f64,
        nodes: usize,
        cdf: impl Fn(f64) -> f64 + Sync,
        pdf: impl Fn(f64) -> f64 + Sync,
    ) -> Self {
        assert!(nodes >= 2 && hi > lo);
        let step = (hi - lo) / (nodes - 1) as f64;
        let (cdf, pdf) = (0..nodes)
            .into_par_iter()
            .map(|k| {
                let s = lo + k as f64 * step;
                (cdf(s), pdf(s))
            })
            .unzip();
        Self {
            start: lo,
            step,
            cdf,
            pdf,
        }
    }

    pub fn range(&self) -> (f64, f64) {
        (
            self.start,
            self.start + self.step * (self.cdf.len() - 1) as f64,
        )
    }

    pub fn eval(&self, s: f64) -> f64 {
        let last = self.cdf.len() - 1;
        let pos = (s - self.start) / self.step;
        if pos.is_nan() {
            return f64::NAN;
        }
        if pos <= 0.0 {
            return self.cdf[0];
        }
        if pos >= last as f64 {
            return self.cdf[last];
        }
        let i = (pos.floor() as usize).min(last - 1);
        let t = pos - i as f64;
        let (y0, y1) = (self.cdf[i], self.cdf[i + 1]);
        let (d0, d1) = (self.pdf[i], self.pdf[i + 1]);
        let value = if d0.is_finite() && d1.is_finite() {
            let h = self.step;
            let t2 = t * t;
            let t3 = t2 * t;
            (2.0 * t3 - 3.0 * t2 + 1.0) * y0
                + (t3 - 2.0 * t2 + t) * h * d0
                + (-2.0 * t3 + 3.0 * t2) * y1
                + (t3 - t2) * h * d1
        } else {
            y0 + t * (y1 - y0)
        };
        value.clamp(0.0, 1.0)
    }
}
