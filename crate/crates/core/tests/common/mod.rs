//! Synthetic panel generators shared by the integration and acceptance
//! suites. Each generator derives its expected values independently of
//! the code under test.

#![allow(dead_code)]

use alphaforge::metrics::OlsFit;
use alphaforge::panel::{Horizon, Panel};
use alphaforge::signals::CANONICAL;
use chrono::{Months, NaiveDate};
use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{LogNormal, Normal};

pub fn quarterly_dates(n: usize) -> Vec<NaiveDate> {
    let anchor = NaiveDate::from_ymd_opt(2015, 12, 31).unwrap();
    (0..n).map(|i| anchor.checked_add_months(Months::new(3 * (i as u32 + 1))).unwrap()).collect()
}

pub fn company_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("C{i:02}")).collect()
}

/// Exact mean-0, sample-std-1 normalization (the test-side definition).
pub fn normalize(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let std = var.sqrt();
    values.iter().map(|v| (v - mean) / std).collect()
}

/// Brute-force average ranks: for each element, count strictly smaller
/// elements and average the positions of its ties by direct enumeration.
pub fn rank_oracle(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let smaller = x.iter().filter(|&&o| o < v).count();
            let equal = x.iter().filter(|&&o| o == v).count();
            // tied block occupies positions smaller+1 ..= smaller+equal
            (2 * smaller + equal + 1) as f64 / 2.0
        })
        .collect()
}

/// Textbook Pearson correlation.
pub fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Normal-equations OLS oracle with an explicit Gauss-Jordan inverse;
/// an independent route from the QR implementation.
pub fn ols_oracle(x: &Array2<f64>, y: &Array1<f64>) -> OlsFit {
    let n = x.nrows();
    let p = x.ncols();
    let cols = p + 1;
    let mut design = vec![vec![0.0; cols]; n];
    for i in 0..n {
        design[i][0] = 1.0;
        for j in 0..p {
            design[i][j + 1] = x[[i, j]];
        }
    }
    let mut xtx = vec![vec![0.0; cols]; cols];
    let mut xty = vec![0.0; cols];
    for i in 0..n {
        for a in 0..cols {
            xty[a] += design[i][a] * y[i];
            for b in 0..cols {
                xtx[a][b] += design[i][a] * design[i][b];
            }
        }
    }
    let inv = invert(&xtx);
    let beta: Vec<f64> =
        (0..cols).map(|a| (0..cols).map(|b| inv[a][b] * xty[b]).sum()).collect();
    let mut residuals = vec![0.0; n];
    let mut ssr = 0.0;
    for i in 0..n {
        let fitted: f64 = (0..cols).map(|a| design[i][a] * beta[a]).sum();
        residuals[i] = y[i] - fitted;
        ssr += residuals[i] * residuals[i];
    }
    let mean_y = y.sum() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean_y) * (v - mean_y)).sum();
    let r2 = 1.0 - ssr / sst;
    let adj_r2 = 1.0 - (1.0 - r2) * (n as f64 - 1.0) / (n as f64 - p as f64 - 1.0);
    OlsFit { coefficients: beta, residuals, r2, adj_r2, n_obs: n, n_regressors: p }
}

fn invert(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut aug: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| aug[a][col].abs().partial_cmp(&aug[b][col].abs()).unwrap())
            .unwrap();
        aug.swap(col, pivot_row);
        let pivot = aug[col][col];
        assert!(pivot.abs() > 1e-12, "oracle matrix is singular");
        for v in aug[col].iter_mut() {
            *v /= pivot;
        }
        for row in 0..n {
            if row != col {
                let f = aug[row][col];
                for j in 0..2 * n {
                    aug[row][j] -= f * aug[col][j];
                }
            }
        }
    }
    aug.into_iter().map(|row| row[n..].to_vec()).collect()
}

/// Expected per-date step-2 coefficients of a zero-noise panel.
pub struct ExpectedGammas {
    pub gamma0: Vec<f64>,
    /// Per date, aligned with the signal list.
    pub gammas: Vec<Vec<f64>>,
}

/// Panel whose returns satisfy both regression steps exactly.
///
/// Signal values are sign patterns scaled by per-company loadings that
/// are already cross-sectionally normalized, so per-date z-scoring is the
/// identity up to float rounding. Returns are constructed so that each
/// company's time series is exactly linear in its signals (step 1) and
/// each date's cross-section is exactly linear in the step-1 coefficients
/// (step 2), with known per-date gammas.
pub fn zero_noise_panel(
    n_companies: usize,
    n_dates: usize,
    n_signals: usize,
    seed: u64,
) -> (Panel, ExpectedGammas) {
    assert!(n_signals <= CANONICAL.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();

    // per-company loadings, exactly normalized across companies
    let mut b = vec![vec![0.0; n_signals]; n_companies];
    for j in 0..n_signals {
        let col: Vec<f64> = (0..n_companies).map(|_| normal.sample(&mut rng)).collect();
        let z = normalize(&col);
        for (i, v) in z.iter().enumerate() {
            b[i][j] = *v;
        }
    }
    // keep the construction's divisors well away from zero
    let lambda = 6.0;
    for row in &b {
        for v in row {
            assert!(v.abs() < lambda - 1.0, "loading {v} too close to lambda");
        }
    }

    // per-signal, per-date sign patterns; at least one flip per signal
    let mut sign = vec![vec![0.0; n_dates]; n_signals];
    for j in 0..n_signals {
        loop {
            for t in 0..n_dates {
                sign[j][t] = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            }
            let flips = sign[j].windows(2).filter(|w| w[0] != w[1]).count();
            if flips >= 2 {
                break;
            }
        }
    }

    let mu: Vec<f64> = (0..n_signals).map(|j| 0.8 + 0.1 * j as f64).collect();
    let a0 = 0.05;

    // c[i][j] = mu_j / (b[i][j] - lambda): the step-1 slopes the pipeline
    // should recover, chosen so step 2 is exact with gamma_{t,j} =
    // sign_{j,t} * lambda and gamma_{t,0} = a0 + sum_j sign_{j,t} * mu_j.
    let c: Vec<Vec<f64>> = (0..n_companies)
        .map(|i| (0..n_signals).map(|j| mu[j] / (b[i][j] - lambda)).collect())
        .collect();

    let dates = quarterly_dates(n_dates);
    let companies = company_names(n_companies);
    let signal_names: Vec<String> =
        CANONICAL.iter().take(n_signals).map(|s| s.to_string()).collect();

    let mut values = Vec::with_capacity(n_companies * n_dates * n_signals);
    let mut fwd = Vec::with_capacity(n_companies * n_dates);
    for i in 0..n_companies {
        for t in 0..n_dates {
            for j in 0..n_signals {
                values.push(Some(sign[j][t] * b[i][j]));
            }
            let ret = a0
                + (0..n_signals).map(|j| sign[j][t] * c[i][j] * b[i][j]).sum::<f64>();
            fwd.push(Some(ret));
        }
    }
    let panel =
        Panel::from_parts(dates, companies, signal_names, values, fwd, Horizon::ThreeMonth)
            .unwrap();

    let gamma0 =
        (0..n_dates).map(|t| a0 + (0..n_signals).map(|j| sign[j][t] * mu[j]).sum::<f64>()).collect();
    let gammas = (0..n_dates)
        .map(|t| (0..n_signals).map(|j| sign[j][t] * lambda).collect())
        .collect();
    (panel, ExpectedGammas { gamma0, gammas })
}

/// Ten-signal panel whose returns load on a hidden factor equal to the
/// candidate formula ROE / PE, plus seeded noise.
///
/// The candidate's per-date z-scores carry a sign-pattern factor
/// structure (`sigma_t * b_i`), so companies differ in their time-series
/// sensitivity to the factor and the cross-section of returns is close to
/// affine in those sensitivities. A model that includes the candidate
/// column can therefore price the cross-section; the ten baseline signals
/// alone cannot. PE is independent noise and ROE is solved from
/// `ROE = factor * PE`, so both observed inputs look unremarkable on
/// their own.
pub fn hidden_factor_panel(n_companies: usize, n_dates: usize, seed: u64, noise: f64) -> Panel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dates = quarterly_dates(n_dates);
    let companies = company_names(n_companies);
    let signal_names: Vec<String> = CANONICAL.iter().map(|s| s.to_string()).collect();
    let m = signal_names.len();

    // spread-out loadings with magnitudes floored away from zero, so no
    // company's factor column degenerates
    let mut raw_loadings: Vec<f64> = (0..n_companies)
        .map(|i| {
            let mag = 0.35 + 1.25 * i as f64 / (n_companies - 1) as f64;
            if i % 2 == 0 {
                mag
            } else {
                -mag
            }
        })
        .collect();
    raw_loadings.shuffle(&mut rng);
    let b = normalize(&raw_loadings);
    let mut sigma = vec![0.0; n_dates];
    loop {
        for s in sigma.iter_mut() {
            *s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        }
        if sigma.windows(2).filter(|w| w[0] != w[1]).count() >= 2 {
            break;
        }
    }
    let (mu, lambda, a0) = (0.9, 6.0, 0.05);
    let sensitivity: Vec<f64> = b.iter().map(|bi| mu / (bi - lambda)).collect();

    let dist = LogNormal::new(0.0, 0.6).unwrap();
    // PE noise is wide so the factor hides inside the ratio: neither
    // observed input carries it linearly.
    let pe_dist = LogNormal::new(0.0, 1.0).unwrap();
    let scale = [18.0, 4.0, 8.0, 15.0, 6.0, 12.0, 10.0, 40.0, 12.0, 25.0];
    let roe = CANONICAL.iter().position(|s| *s == "ROE").unwrap();
    let pe = CANONICAL.iter().position(|s| *s == "PE").unwrap();
    let noise_dist = Normal::new(0.0, noise).unwrap();

    let mut values = vec![None; n_companies * n_dates * m];
    let mut fwd = vec![None; n_companies * n_dates];
    for i in 0..n_companies {
        for t in 0..n_dates {
            // hidden factor with exact per-date cross-sectional shape; the
            // large base keeps the factor's imprint on ROE small relative
            // to PE noise, while the ratio recovers it scale-free
            let factor = 50.0 + sigma[t] * b[i];
            for j in 0..m {
                let cell = if j == roe {
                    continue; // filled below from factor * PE
                } else if j == pe {
                    scale[j] * pe_dist.sample(&mut rng)
                } else {
                    scale[j] * dist.sample(&mut rng)
                };
                values[(i * n_dates + t) * m + j] = Some(cell);
            }
            let pe_value = values[(i * n_dates + t) * m + pe].unwrap();
            values[(i * n_dates + t) * m + roe] = Some(factor * pe_value);
            let ret = a0 + sigma[t] * sensitivity[i] * b[i] + noise_dist.sample(&mut rng);
            fwd[i * n_dates + t] = Some(ret);
        }
    }
    Panel::from_parts(dates, companies, signal_names, values, fwd, Horizon::ThreeMonth).unwrap()
}

/// Ten-signal panel whose returns mix the z-scored values of all six
/// builtin alphas, dominated by EVC, plus seeded noise. Used for the
/// correlation range ordering check.
pub fn builtin_loaded_panel(n_companies: usize, n_dates: usize, seed: u64, noise: f64) -> Panel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dates = quarterly_dates(n_dates);
    let companies = company_names(n_companies);
    let signal_names: Vec<String> = CANONICAL.iter().map(|s| s.to_string()).collect();
    let m = signal_names.len();

    let dist = LogNormal::new(0.0, 0.5).unwrap();
    let scale = [18.0, 4.0, 8.0, 15.0, 6.0, 12.0, 10.0, 40.0, 12.0, 25.0];
    let mut raw = vec![vec![vec![0.0; m]; n_dates]; n_companies];
    for row in raw.iter_mut() {
        for per_date in row.iter_mut() {
            for (j, cell) in per_date.iter_mut().enumerate() {
                *cell = scale[j] * dist.sample(&mut rng);
            }
        }
    }

    let defs = alphaforge::builtin_alphas();
    let weights = [0.2, 0.2, 1.0, 0.2, 0.3, 0.3]; // EVC dominates
    let noise_dist = Normal::new(0.0, noise).unwrap();

    let mut values = vec![None; n_companies * n_dates * m];
    let mut fwd = vec![None; n_companies * n_dates];
    for (i, row) in raw.iter().enumerate() {
        for (t, per_date) in row.iter().enumerate() {
            for (j, cell) in per_date.iter().enumerate() {
                values[(i * n_dates + t) * m + j] = Some(*cell);
            }
        }
    }
    for t in 0..n_dates {
        let mut mix = vec![0.0; n_companies];
        for (def, w) in defs.iter().zip(weights) {
            let col: Vec<f64> = (0..n_companies)
                .map(|i| {
                    let lookup = |id: &str| {
                        CANONICAL.iter().position(|s| *s == id).map(|j| raw[i][t][j])
                    };
                    def.expr.eval_with(&lookup).expect("positive inputs evaluate")
                })
                .collect();
            let z = normalize(&col);
            for (acc, v) in mix.iter_mut().zip(z) {
                *acc += w * v;
            }
        }
        let zmix = normalize(&mix);
        for i in 0..n_companies {
            fwd[i * n_dates + t] = Some(0.05 * zmix[i] + noise_dist.sample(&mut rng));
        }
    }
    Panel::from_parts(dates, companies, signal_names, values, fwd, Horizon::ThreeMonth).unwrap()
}
