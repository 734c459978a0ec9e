use crate::error::{Error, Result};

const MODULE: &str = "markov";

/// Growth model for a sequence of Markov factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitModel {
    /// `M_n = c·n^μ`.
    PurePower,
    /// `M_n = c·n^μ·(1 + ι ln(2n²))`.
    LogCorrected { iota: f64 },
}

impl FitModel {
    fn correction(&self, n: f64) -> f64 {
        match self {
            FitModel::PurePower => 0.0,
            FitModel::LogCorrected { iota } => (1.0 + iota * (2.0 * n * n).ln()).ln(),
        }
    }
}

/// Per-degree factors and the fitted growth law.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovReport {
    /// `(n, factor)` sorted by `n`.
    pub entries: Vec<(usize, f64)>,
    pub fitted_exponent: f64,
    pub fitted_constant: f64,
    pub model: FitModel,
    /// RMS residual in log space.
    pub residual: f64,
}

/// Least squares for `log M_n - correction(n) = log c + μ log n`.
pub fn fit_exponent(entries: &[(usize, f64)], model: FitModel) -> Result<MarkovReport> {
    if entries.len() < 4 {
        return Err(Error::fit(MODULE, format!("need at least 4 entries, got {}", entries.len())));
    }
    let mut sorted = entries.to_vec();
    sorted.sort_by_key(|e| e.0);
    if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::fit(MODULE, "degrees must be distinct"));
    }
    if let Some(&(n, m)) = sorted.iter().find(|e| !(e.1 > 0.0 && e.1.is_finite()) || e.0 == 0) {
        return Err(Error::fit(MODULE, format!("entry (n = {n}, factor = {m}) cannot be log-transformed")));
    }
    if let FitModel::LogCorrected { iota } = model {
        if !(iota > 0.0) {
            return Err(Error::fit(MODULE, format!("log correction needs ι > 0, got {iota}")));
        }
    }
    let xs: Vec<f64> = sorted.iter().map(|e| (e.0 as f64).ln()).collect();
    let ys: Vec<f64> = sorted.iter().map(|e| e.1.ln() - model.correction(e.0 as f64)).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 1e-300) {
        return Err(Error::fit(MODULE, "degenerate design matrix"));
    }
    let mu = sxy / sxx;
    let b = my - mu * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - b - mu * x).powi(2)).sum();
    Ok(MarkovReport {
        entries: sorted,
        fitted_exponent: mu,
        fitted_constant: b.exp(),
        model,
        residual: (rss / k).sqrt(),
    })
}

/// Log-log slopes between consecutive entries.
pub fn local_slopes(entries: &[(usize, f64)]) -> Vec<f64> {
    entries
        .windows(2)
        .map(|w| (w[1].1 / w[0].1).ln() / (w[1].0 as f64 / w[0].0 as f64).ln())
        .collect()
}
