//! Monte Carlo experiments and growth fits.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::area::{area_dispatch, AreaConfig};
use crate::chains::Chain;
use crate::combing::Combing;
use crate::error::{Error, Result};
use crate::filling::{fill_area, find_slow_pair, line_projections};
use crate::model::{for_each_reduced_word, GroupModel, NormalForm};
use crate::report::{fmt_float, CsvTable};
use crate::rng::{derive_seed, trial_rng};
use crate::word::{Letter, Word};

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Rows whose failure share exceeds this are flagged.
pub const FAILURE_FLAG_SHARE: f64 = 0.01;

/// Default cap on the word length of worst-case enumeration.
pub const DEFAULT_MAX_DEHN_LEN: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares line through `(x, y)` points.
pub fn linear_fit(pts: &[(f64, f64)]) -> LinearFit {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r2 = if sxx > 0.0 && syy > 0.0 { sxy * sxy / (sxx * syy) } else { 0.0 };
    LinearFit {
        slope,
        intercept: my - slope * mx,
        r2,
    }
}

/// Least squares solution of `rows * beta = ys`, `None` when the design is
/// rank deficient.
pub fn least_squares<const P: usize>(rows: &[[f64; P]], ys: &[f64]) -> Option<[f64; P]> {
    if rows.len() < P {
        return None;
    }
    let a = DMatrix::from_fn(rows.len(), P, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(ys);
    let svd = a.svd(true, true);
    let tol = 1e-10 * svd.singular_values.max();
    if svd.rank(tol) < P {
        return None;
    }
    let x = svd.solve(&b, tol).ok()?;
    let mut out = [0.0; P];
    out.copy_from_slice(x.as_slice());
    Some(out)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Percentile of sorted values, by the nearest-rank-below rule.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).floor() as usize;
    sorted[idx]
}

/// 95% percentile bootstrap interval of the mean.
fn bootstrap_mean_ci(xs: &[f64], seed: u64) -> (f64, f64) {
    let mut rng = trial_rng(seed, 0);
    let mut means: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let s: f64 = (0..xs.len()).map(|_| xs[rng.random_range(0..xs.len())]).sum();
            s / xs.len() as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let m = mean(xs);
    (percentile(&means, 0.025).min(m), percentile(&means, 0.975).max(m))
}

/// Provenance recorded with every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub group: String,
    pub chain: String,
    pub combing: String,
    pub seed: u64,
    pub version: String,
}

impl Meta {
    pub fn new(group: &str, chain: &str, combing: &str, seed: u64) -> Self {
        Meta {
            group: group.into(),
            chain: chain.into(),
            combing: combing.into(),
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RDehnConfig {
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Basepoints for the supremum; the identity when empty.
    pub basepoints: Vec<NormalForm>,
    pub area: AreaConfig,
    /// Keep per-trial values in the rows (used by trial-level bootstraps).
    pub keep_samples: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RDehnRow {
    pub n: usize,
    /// Trials that produced a value.
    pub trials: usize,
    pub mean_fill: f64,
    pub std_fill: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_boundary_len: f64,
    pub exact_fraction: f64,
    /// Trials lost to exhausted budgets.
    pub failures: usize,
    /// More than 1% of the trials failed.
    pub flagged: bool,
    /// Basepoint attaining the maximum mean.
    pub basepoint: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RDehnTable {
    pub meta: Meta,
    pub rows: Vec<RDehnRow>,
}

impl CsvTable for RDehnTable {
    fn csv_header(&self) -> &'static str {
        "n,trials,mean_fill,std_fill,ci_lo,ci_hi,mean_boundary_len,exact_fraction"
    }

    fn csv_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{},{},{}",
                    r.n,
                    r.trials,
                    fmt_float(r.mean_fill),
                    fmt_float(r.std_fill),
                    fmt_float(r.ci_lo),
                    fmt_float(r.ci_hi),
                    fmt_float(r.mean_boundary_len),
                    fmt_float(r.exact_fraction)
                )
            })
            .collect()
    }
}

/// Master seed of the trials for step count `n` at basepoint number `b`.
pub fn row_seed(master: u64, n: usize, b: usize) -> u64 {
    derive_seed(master, ((n as u64) << 16) | b as u64)
}

/// One Monte Carlo trial of `Fill`: area, boundary length, exact grade.
/// Budget exhaustion yields `None`.
pub fn fill_trial(
    chain: &Chain,
    combing: &Combing,
    o: &NormalForm,
    n: usize,
    seed: u64,
    trial: u64,
    area: &AreaConfig,
) -> Result<Option<(f64, usize, bool)>> {
    let path = chain.sample_path(o, n, seed, trial)?;
    match fill_area(combing, &path, area) {
        Ok(f) => Ok(Some((f.area.value as f64, f.word.len(), f.area.is_exact()))),
        Err(e) if e.is_budget() => Ok(None),
        Err(e) => Err(e),
    }
}

/// Monte Carlo random Dehn function: the mean of `Fill` over sampled
/// trajectories, maximized over the basepoints.
pub fn estimate_rdehn(chain: &Chain, combing: &Combing, cfg: &RDehnConfig, meta: Meta) -> Result<RDehnTable> {
    if cfg.trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let basepoints = if cfg.basepoints.is_empty() {
        vec![NormalForm::identity()]
    } else {
        cfg.basepoints.clone()
    };
    let model = combing.model();
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let mut best: Option<RDehnRow> = None;
        for (b, o) in basepoints.iter().enumerate() {
            let seed = row_seed(cfg.seed, n, b);
            let results: Vec<Option<(f64, usize, bool)>> = (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| fill_trial(chain, combing, o, n, seed, t, &cfg.area))
                .collect::<Result<_>>()?;
            let ok: Vec<(f64, usize, bool)> = results.iter().flatten().copied().collect();
            let failures = cfg.trials - ok.len();
            if ok.is_empty() {
                return Err(Error::BudgetExceeded(format!("every trial at n = {n} exhausted its budget")));
            }
            let values: Vec<f64> = ok.iter().map(|r| r.0).collect();
            let m = mean(&values);
            let (ci_lo, ci_hi) = bootstrap_mean_ci(&values, derive_seed(seed, 0xB007));
            let row = RDehnRow {
                n,
                trials: ok.len(),
                mean_fill: m,
                std_fill: sample_std(&values),
                ci_lo,
                ci_hi,
                mean_boundary_len: ok.iter().map(|r| r.1 as f64).sum::<f64>() / ok.len() as f64,
                exact_fraction: ok.iter().filter(|r| r.2).count() as f64 / ok.len() as f64,
                failures,
                flagged: failures as f64 > FAILURE_FLAG_SHARE * cfg.trials as f64,
                basepoint: model.format_word(o.word()),
                samples: if cfg.keep_samples { values } else { Vec::new() },
            };
            if best.as_ref().is_none_or(|r| row.mean_fill > r.mean_fill) {
                best = Some(row);
            }
        }
        rows.extend(best);
    }
    Ok(RDehnTable { meta, rows })
}

/// Exact `E[Fill]` over all `|law|^n` step sequences of a
/// translation-invariant chain.
pub fn exact_expected_fill(chain: &Chain, combing: &Combing, n: usize, area: &AreaConfig) -> Result<f64> {
    let law = chain
        .step_law()
        .ok_or_else(|| Error::Unsupported("exact enumeration needs a translation-invariant chain".into()))?;
    let mut total = 0.0;
    let mut idx = vec![0usize; n];
    loop {
        let steps: Vec<Word> = idx.iter().map(|&i| law[i].0.clone()).collect();
        let p: f64 = idx.iter().map(|&i| law[i].1).product();
        let path = crate::chains::PathSample::from_steps(NormalForm::identity(), steps);
        total += p * fill_area(combing, &path, area)?.area.value as f64;
        // odometer
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(total);
            }
            idx[pos] += 1;
            if idx[pos] < law.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DehnRow {
    pub length: usize,
    pub max_area: usize,
    pub witness: String,
    /// Null-homotopic words of exactly this length examined (one per class
    /// under rotation and inversion).
    pub words_checked: usize,
    /// Of those, words whose area was not exact and so were ignored.
    pub inexact: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DehnTable {
    pub group: String,
    pub rows: Vec<DehnRow>,
}

impl CsvTable for DehnTable {
    fn csv_header(&self) -> &'static str {
        "length,max_area,witness,words_checked,inexact"
    }

    fn csv_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| format!("{},{},{},{},{}", r.length, r.max_area, r.witness, r.words_checked, r.inexact))
            .collect()
    }
}

/// Least word among all rotations of `w` and of its inverse.
fn is_cyclic_canonical(w: &[Letter]) -> bool {
    let n = w.len();
    if n == 0 {
        return true;
    }
    if w[0] == w[n - 1].inverse() {
        return false;
    }
    let inv: Vec<Letter> = w.iter().rev().map(|l| l.inverse()).collect();
    for cand in [w, inv.as_slice()] {
        for s in 0..n {
            for t in 0..n {
                let (a, b) = (cand[(s + t) % n], w[t]);
                if a != b {
                    if a < b {
                        return false;
                    }
                    break;
                }
            }
        }
    }
    true
}

/// Worst-case area over null-homotopic words of length at most `ℓ`, for
/// every `ℓ <= max_len`. Words are enumerated up to rotation and inversion,
/// which preserve area.
pub fn estimate_worstcase_dehn(model: &GroupModel, max_len: usize, cap: usize, area: &AreaConfig) -> Result<DehnTable> {
    if max_len > cap {
        return Err(Error::BudgetExceeded(format!("length {max_len} above the enumeration cap {cap}")));
    }
    let alphabet = model.alphabet();
    let mut rows = Vec::with_capacity(max_len);
    let (mut best, mut witness) = (0usize, String::new());
    for len in 1..=max_len {
        let mut words = Vec::new();
        for_each_reduced_word(&alphabet, len, &mut |w| {
            if is_cyclic_canonical(w) {
                words.push(Word(w.to_vec()));
            }
            false
        });
        let scored: Vec<Option<Option<usize>>> = words
            .par_iter()
            .map(|w| {
                if !model.is_identity(w)? {
                    return Ok(None);
                }
                match area_dispatch(model, w, area) {
                    Ok(a) if a.is_exact() => Ok(Some(Some(a.value))),
                    Ok(_) => Ok(Some(None)),
                    Err(e) if e.is_budget() => Ok(Some(None)),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<_>>()?;
        let mut checked = 0;
        let mut inexact = 0;
        for (w, s) in words.iter().zip(&scored) {
            match s {
                None => {}
                Some(None) => {
                    checked += 1;
                    inexact += 1;
                }
                Some(Some(a)) => {
                    checked += 1;
                    if *a > best || witness.is_empty() {
                        best = *a;
                        witness = model.format_word(w);
                    }
                }
            }
        }
        rows.push(DehnRow {
            length: len,
            max_area: best,
            witness: witness.clone(),
            words_checked: checked,
            inexact,
        });
    }
    Ok(DehnTable {
        group: model.name().to_string(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationProfile {
    pub meta: Meta,
    pub n: usize,
    pub trials: usize,
    /// Per trial: `max_k d(w_k, closing line)`.
    pub max_deviation: Vec<usize>,
    /// `tail[l] = P[max deviation >= l]`.
    pub tail: Vec<f64>,
    /// Inclusive threshold range of the fit: `[2, 90th percentile]`.
    pub fit_range: (usize, usize),
    pub fit: Option<LinearFit>,
    /// `1 / |slope|`.
    pub c1: Option<f64>,
}

impl CsvTable for DeviationProfile {
    fn csv_header(&self) -> &'static str {
        "l,tail"
    }

    fn csv_rows(&self) -> Vec<String> {
        self.tail
            .iter()
            .enumerate()
            .map(|(l, p)| format!("{l},{}", fmt_float(*p)))
            .collect()
    }
}

/// Tail of the largest distance between a trajectory and the combing line
/// of its endpoint, with a log-linear fit.
pub fn deviation_profile(
    chain: &Chain,
    combing: &Combing,
    n: usize,
    trials: usize,
    seed: u64,
    meta: Meta,
) -> Result<DeviationProfile> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let model = combing.model();
    let max_deviation: Vec<usize> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let path = chain.sample_path(&NormalForm::identity(), n, seed, t)?;
            let line = combing.line(&path.displacement(model)?)?;
            let proj = line_projections(model, &path, &line)?;
            Ok(proj.iter().map(|p| p.distance).max().unwrap_or(0))
        })
        .collect::<Result<_>>()?;
    let top = max_deviation.iter().copied().max().unwrap_or(0);
    let tf = trials as f64;
    let tail: Vec<f64> = (0..=top + 1)
        .map(|l| max_deviation.iter().filter(|&&d| d >= l).count() as f64 / tf)
        .collect();
    let mut sorted = max_deviation.clone();
    sorted.sort_unstable();
    let l90 = sorted[((trials - 1) as f64 * 0.9).floor() as usize];
    let fit_range = (2, l90);
    let pts: Vec<(f64, f64)> = (fit_range.0..=fit_range.1)
        .filter(|&l| l < tail.len() && tail[l] > 0.0)
        .map(|l| (l as f64, tail[l].ln()))
        .collect();
    let fit = (pts.len() >= 2).then(|| linear_fit(&pts));
    let c1 = fit.filter(|f| f.slope < 0.0).map(|f| 1.0 / f.slope.abs());
    Ok(DeviationProfile {
        meta,
        n,
        trials,
        max_deviation,
        tail,
        fit_range,
        fit,
        c1,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubwalkRow {
    pub n: usize,
    pub c3: f64,
    pub frequency: f64,
    /// Reference decay `C3 * n^(-r)`.
    pub target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubwalkReport {
    pub meta: Meta,
    pub trials: usize,
    pub r: f64,
    pub rows: Vec<SubwalkRow>,
}

impl CsvTable for SubwalkReport {
    fn csv_header(&self) -> &'static str {
        "n,c3,frequency,target"
    }

    fn csv_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| format!("{},{},{},{}", r.n, fmt_float(r.c3), fmt_float(r.frequency), fmt_float(r.target)))
            .collect()
    }
}

/// Frequency of a slow subwalk: some `i < j <= n` with
/// `j - i >= C3 ln n` and `d(w_i, w_j) <= (j - i) / C3`.
pub fn subwalk_progress(
    chain: &Chain,
    n_grid: &[usize],
    trials: usize,
    c3_grid: &[f64],
    r: f64,
    seed: u64,
    meta: Meta,
) -> Result<SubwalkReport> {
    if n_grid.is_empty() {
        return Err(Error::InvalidInput("n_grid must not be empty".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let model = chain.model();
    let mut rows = Vec::new();
    for &n in n_grid {
        let s = derive_seed(seed, n as u64);
        let bad: Vec<Vec<bool>> = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let path = chain.sample_path(&NormalForm::identity(), n, s, t)?;
                c3_grid
                    .iter()
                    .map(|&c3| Ok(find_slow_pair(model, &path, c3)?.is_some()))
                    .collect::<Result<Vec<bool>>>()
            })
            .collect::<Result<_>>()?;
        for (ci, &c3) in c3_grid.iter().enumerate() {
            let count = bad.iter().filter(|b| b[ci]).count();
            rows.push(SubwalkRow {
                n,
                c3,
                frequency: count as f64 / trials as f64,
                target: c3 * (n as f64).powf(-r),
            });
        }
    }
    Ok(SubwalkReport { meta, trials, r, rows })
}

/// One data point of a growth law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub n: f64,
    pub mean: f64,
    /// Per-trial values; when present for every point the bootstrap
    /// resamples trials, otherwise residuals.
    #[serde(default)]
    pub samples: Vec<f64>,
}

impl GrowthPoint {
    pub fn from_rdehn(table: &RDehnTable) -> Vec<GrowthPoint> {
        table
            .rows
            .iter()
            .map(|r| GrowthPoint {
                n: r.n as f64,
                mean: r.mean_fill,
                samples: r.samples.clone(),
            })
            .collect()
    }

    pub fn from_dehn(table: &DehnTable) -> Vec<GrowthPoint> {
        table
            .rows
            .iter()
            .map(|r| GrowthPoint {
                n: r.length as f64,
                mean: r.max_area as f64,
                samples: Vec::new(),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingRatio {
    pub n: f64,
    pub next_n: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub n: f64,
    pub mean: f64,
    pub fitted: f64,
    pub residual: f64,
    pub linear: f64,
    pub n_log_n: f64,
    pub quadratic: f64,
    /// `n / ln(n) * delta(ln n)` with `delta(m) = m^d`.
    pub predicted: f64,
}

/// `mean ~ C n^a (ln n)^b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub log_c: f64,
    pub a: f64,
    pub b: f64,
    pub a_ci: (f64, f64),
    pub b_ci: (f64, f64),
    pub degree: u32,
    pub doubling: Vec<DoublingRatio>,
    pub rows: Vec<ReferenceRow>,
}

impl CsvTable for GrowthFit {
    fn csv_header(&self) -> &'static str {
        "n,mean,fitted,residual,linear,n_log_n,quadratic,predicted"
    }

    fn csv_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                [r.n, r.mean, r.fitted, r.residual, r.linear, r.n_log_n, r.quadratic, r.predicted]
                    .iter()
                    .map(|x| fmt_float(*x))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect()
    }
}

fn design(points: &[GrowthPoint]) -> Vec<[f64; 3]> {
    points.iter().map(|p| [1.0, p.n.ln(), p.n.ln().ln()]).collect()
}

/// Fits `ln mean = ln C + a ln n + b ln ln n`, with 95% bootstrap
/// intervals, and reports doubling ratios and reference curves.
pub fn fit_growth(points: &[GrowthPoint], degree: u32, seed: u64) -> Result<GrowthFit> {
    if points.len() < 4 {
        return Err(Error::InsufficientData(format!("{} rows, at least 4 needed", points.len())));
    }
    let lo = points.iter().map(|p| p.n).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.n).fold(0.0, f64::max);
    if lo < 2.0 || hi < 4.0 * lo {
        return Err(Error::InsufficientData("n must span at least two octaves, starting at 2".into()));
    }
    if points.iter().any(|p| p.mean.is_nan() || p.mean <= 0.0) {
        return Err(Error::InsufficientData("growth fits need positive means".into()));
    }
    let x = design(points);
    let ys: Vec<f64> = points.iter().map(|p| p.mean.ln()).collect();
    let beta = least_squares(&x, &ys).ok_or_else(|| Error::InsufficientData("degenerate design".into()))?;
    let fitted: Vec<f64> = x.iter().map(|r| r[0] * beta[0] + r[1] * beta[1] + r[2] * beta[2]).collect();
    let residuals: Vec<f64> = ys.iter().zip(&fitted).map(|(y, f)| y - f).collect();

    let by_trials = points.iter().all(|p| p.samples.len() >= 2);
    let mut rng = trial_rng(derive_seed(seed, 0x6F17), 0);
    let mut a_s = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut b_s = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let ys_star: Vec<f64> = if by_trials {
            points
                .iter()
                .map(|p| {
                    let k = p.samples.len();
                    let s: f64 = (0..k).map(|_| p.samples[rng.random_range(0..k)]).sum();
                    (s / k as f64).max(f64::MIN_POSITIVE).ln()
                })
                .collect()
        } else {
            fitted
                .iter()
                .map(|f| f + residuals[rng.random_range(0..residuals.len())])
                .collect()
        };
        if let Some(bs) = least_squares(&x, &ys_star) {
            a_s.push(bs[1]);
            b_s.push(bs[2]);
        }
    }
    a_s.sort_by(f64::total_cmp);
    b_s.sort_by(f64::total_cmp);
    let ci = |v: &[f64], est: f64| {
        if v.is_empty() {
            (est, est)
        } else {
            (percentile(v, 0.025), percentile(v, 0.975))
        }
    };

    let mut sorted: Vec<&GrowthPoint> = points.iter().collect();
    sorted.sort_by(|p, q| p.n.total_cmp(&q.n));
    let doubling = sorted
        .windows(2)
        .filter(|w| (w[1].n - 2.0 * w[0].n).abs() < 1e-9)
        .map(|w| DoublingRatio {
            n: w[0].n,
            next_n: w[1].n,
            ratio: w[1].mean / w[0].mean,
        })
        .collect();
    let rows = points
        .iter()
        .zip(&fitted)
        .zip(&residuals)
        .map(|((p, f), r)| {
            let ln = p.n.ln();
            ReferenceRow {
                n: p.n,
                mean: p.mean,
                fitted: f.exp(),
                residual: *r,
                linear: p.n,
                n_log_n: p.n * ln,
                quadratic: p.n * p.n,
                predicted: p.n / ln * ln.powi(degree as i32),
            }
        })
        .collect();
    Ok(GrowthFit {
        log_c: beta[0],
        a: beta[1],
        b: beta[2],
        a_ci: ci(&a_s, beta[1]),
        b_ci: ci(&b_s, beta[2]),
        degree,
        doubling,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64) -> Vec<GrowthPoint> {
        [16.0, 32.0, 64.0, 128.0, 256.0]
            .iter()
            .map(|&n| GrowthPoint {
                n,
                mean: f(n),
                samples: Vec::new(),
            })
            .collect()
    }

    #[test]
    fn recovers_linear_growth() {
        let fit = fit_growth(&synthetic(|n| n), 1, 0).unwrap();
        assert!((0.98..=1.02).contains(&fit.a));
        assert!(fit.b.abs() < 1e-8);
        assert!(fit.a_ci.0 <= fit.a && fit.a <= fit.a_ci.1);
    }

    #[test]
    fn recovers_n_log_n() {
        let fit = fit_growth(&synthetic(|n| n * n.ln()), 1, 0).unwrap();
        assert!((fit.a - 1.0).abs() < 1e-8);
        assert!((fit.b - 1.0).abs() < 1e-8);
        assert!(fit.b_ci.0 <= 1.0 + 1e-8 && 1.0 - 1e-8 <= fit.b_ci.1);
    }

    #[test]
    fn quadratic_doubles_by_four() {
        let fit = fit_growth(&synthetic(|n| n * n), 2, 0).unwrap();
        assert_eq!(fit.doubling.len(), 4);
        for d in &fit.doubling {
            assert!((d.ratio - 4.0).abs() <= 0.01);
        }
    }

    #[test]
    fn rejects_short_tables() {
        let pts = synthetic(|n| n);
        assert!(matches!(fit_growth(&pts[..3], 1, 0), Err(Error::InsufficientData(_))));
        let narrow: Vec<GrowthPoint> = [16.0, 20.0, 24.0, 32.0]
            .iter()
            .map(|&n| GrowthPoint { n, mean: n, samples: vec![] })
            .collect();
        assert!(matches!(fit_growth(&narrow, 1, 0), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn linear_fit_exact_line() {
        let f = linear_fit(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]);
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_cyclic_words() {
        let m = GroupModel::builtin("z2").unwrap();
        let w = |s: &str| m.parse_word(s).unwrap().0;
        assert!(is_cyclic_canonical(&w("abAB")));
        assert!(!is_cyclic_canonical(&w("bABa")));
        assert!(!is_cyclic_canonical(&w("baBA")));
        assert!(is_cyclic_canonical(&w("aabbAABB")));
        assert!(!is_cyclic_canonical(&w("aabA")));
    }

    #[test]
    fn bootstrap_interval_contains_mean() {
        let xs = [1.0, 2.0, 2.0, 7.0, 3.0];
        let (lo, hi) = bootstrap_mean_ci(&xs, 4);
        assert!(lo <= mean(&xs) && mean(&xs) <= hi);
        assert_eq!(bootstrap_mean_ci(&[5.0], 1), (5.0, 5.0));
    }
}
