//! Small numerical helpers shared across modules.

use num_complex::Complex64;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn kahan_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = KahanSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

pub fn kahan_sum_complex<I: IntoIterator<Item = Complex64>>(xs: I) -> Complex64 {
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    for z in xs {
        re.add(z.re);
        im.add(z.im);
    }
    Complex64::new(re.value(), im.value())
}

/// Japanese bracket with the convention `<0> = 1`.
pub fn bracket(n: i64) -> f64 {
    (n.unsigned_abs().max(1)) as f64
}

/// Least-squares line through `(x, y)` pairs.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% confidence interval of the slope (NaN when
    /// fewer than three points were fitted).
    pub slope_ci95: f64,
    pub points: usize,
}

/// Ordinary least squares. Returns `None` for fewer than two points or a
/// degenerate abscissa.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = kahan_sum(xs[..n].iter().copied()) / nf;
    let my = kahan_sum(ys[..n].iter().copied()) / nf;
    let sxx = kahan_sum(xs[..n].iter().map(|x| (x - mx) * (x - mx)));
    let sxy = kahan_sum(xs[..n].iter().zip(&ys[..n]).map(|(x, y)| (x - mx) * (y - my)));
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_ci95 = if n > 2 {
        let rss = kahan_sum(xs[..n].iter().zip(&ys[..n]).map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        }));
        let se = (rss / (nf - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, nf - 2.0).expect("positive degrees of freedom");
        t.inverse_cdf(0.975) * se
    } else {
        f64::NAN
    };
    Some(LineFit { slope, intercept, slope_ci95, points: n })
}

/// Slope of `log y` against `log x`, skipping non-positive entries.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) =
        xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).unzip();
    linear_fit(&lx, &ly)
}
