use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::centrality::{DailyMetrics, Measure};
use crate::error::{GovError, Result};
use crate::govdata::{Category, Derivation, FactorCatalogue, FactorPanel, SeriesKey, INSTRUMENT_FACTOR};
use crate::stats::{mean, standardize};

/// One generated factor: `intercept + sum(loading * zscore(measure)) + noise`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorPlan {
    pub token: String,
    pub category: Category,
    pub factor: String,
    pub intercept: f64,
    #[serde(default)]
    pub loadings: Vec<(Measure, f64)>,
    pub noise_std: f64,
}

/// Instrument for `measure`: `strength * zscore(measure) + sqrt(1 - strength^2) * noise`.
/// With `gamma != 0` every factor also loads on the part of the measure the
/// instrument does not explain, which makes the measure endogenous.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndogenousBlock {
    pub measure: Measure,
    pub gamma: f64,
    pub instrument_strength: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PanelPlan {
    pub factors: Vec<FactorPlan>,
    /// Tokens that get a random-walk `Price` series (and so derived returns
    /// and volatilities downstream).
    #[serde(default)]
    pub price_tokens: Vec<String>,
    #[serde(default)]
    pub endogeneity: Option<EndogenousBlock>,
    /// Token under which the instrument series is emitted.
    #[serde(default = "default_instrument_token")]
    pub instrument_token: String,
}

fn default_instrument_token() -> String {
    "MKR".to_string()
}

impl Default for PanelPlan {
    fn default() -> Self {
        PanelPlan {
            factors: Vec::new(),
            price_tokens: Vec::new(),
            endogeneity: None,
            instrument_token: default_instrument_token(),
        }
    }
}

impl PanelPlan {
    /// Every ingested catalogue factor of `tokens` as pure noise, plus prices.
    pub fn catalogue(tokens: &[&str]) -> Self {
        let mut factors = Vec::new();
        for t in tokens {
            for spec in FactorCatalogue.entries() {
                let skip = spec.derivation == Derivation::Derived
                    || spec.category == Category::Instrument
                    || spec.template == "Price";
                if !skip {
                    factors.push(FactorPlan {
                        token: t.to_ascii_uppercase(),
                        category: spec.category,
                        factor: spec.name_for(t),
                        intercept: 0.0,
                        loadings: Vec::new(),
                        noise_std: 1.0,
                    });
                }
            }
        }
        PanelPlan {
            factors,
            price_tokens: tokens.iter().map(|t| t.to_ascii_uppercase()).collect(),
            endogeneity: None,
            instrument_token: default_instrument_token(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(f) = self.factors.iter().find(|f| f.noise_std.is_nan() || f.noise_std < 0.0) {
            return Err(GovError::Config(format!("noise_std of {} must be non-negative", f.factor)));
        }
        if let Some(e) = self.endogeneity {
            if !(-1.0..=1.0).contains(&e.instrument_strength) {
                return Err(GovError::Config("instrument_strength must be in [-1, 1]".into()));
            }
        }
        Ok(())
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Residual of `y` regressed on `x` with intercept.
fn residualize(y: &[f64], x: &[f64]) -> Vec<f64> {
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    y.iter().zip(x).map(|(yi, xi)| yi - my - b * (xi - mx)).collect()
}

/// Factor panel over the dates of `metrics`, drawn from one seeded stream.
pub fn gen_panel(metrics: &[DailyMetrics<f64>], plan: &PanelPlan, seed: u64) -> Result<FactorPanel<f64>> {
    if metrics.is_empty() {
        return Err(GovError::Empty("daily metrics"));
    }
    plan.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dates: Vec<NaiveDate> = metrics.iter().map(|m| m.date).collect();
    let z_measure = |m: Measure| standardize(&metrics.iter().map(|d| d.measure(m)).collect::<Vec<_>>());
    let mut panel = FactorPanel::new();

    let mut confound = vec![0.0; dates.len()];
    if let Some(block) = plan.endogeneity {
        let m = z_measure(block.measure);
        let s = block.instrument_strength;
        let z: Vec<f64> = m.iter().map(|&mi| s * mi + (1.0 - s * s).sqrt() * normal(&mut rng)).collect();
        confound = residualize(&m, &z).into_iter().map(|c| block.gamma * c).collect();
        let key = SeriesKey::new(&plan.instrument_token, Category::Instrument, INSTRUMENT_FACTOR);
        for (d, zi) in dates.iter().zip(&z) {
            panel.insert(*d, key.clone(), 50.0 + 20.0 * zi);
        }
    }

    for token in &plan.price_tokens {
        let key = SeriesKey::new(token, Category::Financial, "Price");
        let mut p = 100.0_f64;
        for d in &dates {
            panel.insert(*d, key.clone(), p);
            p *= (0.03 * normal(&mut rng)).exp();
        }
    }

    for f in &plan.factors {
        let loaded: Vec<(Vec<f64>, f64)> = f.loadings.iter().map(|&(m, l)| (z_measure(m), l)).collect();
        let key = SeriesKey::new(&f.token, f.category, &f.factor);
        for (t, d) in dates.iter().enumerate() {
            let signal: f64 = loaded.iter().map(|(m, l)| l * m[t]).sum();
            let noise = if f.noise_std > 0.0 { f.noise_std * normal(&mut rng) } else { 0.0 };
            panel.insert(*d, key.clone(), f.intercept + signal + confound[t] + noise);
        }
    }
    Ok(panel)
}

/// Draws `(y, x, z)` with `x = z + v`, `y = beta x + u` and
/// `u = rho v + sqrt(1 - rho^2) e`; `rho = 0` makes `x` exogenous.
pub fn gen_iv_sample(n: usize, beta: f64, rho: f64, seed: u64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut y, mut x, mut z) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let (zi, vi, ei) = (normal(&mut rng), normal(&mut rng), normal(&mut rng));
        let u = rho * vi + (1.0 - rho * rho).sqrt() * ei;
        let xi = zi + vi;
        z.push(zi);
        x.push(xi);
        y.push(beta * xi + u);
    }
    (y, x, z)
}
