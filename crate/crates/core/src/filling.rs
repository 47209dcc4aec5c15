//! The `Fill` functional and the corridor decomposition of the filling
//! loop of a trajectory.
//!
//! A trajectory `x_0, ..., x_n` with right increments `g_i = x_i^-1 x_{i+1}`
//! yields the null-homotopic word
//! `W = line(g_0) line(g_1) ... line(g_{n-1}) line(x_0^-1 x_n)^-1`.

use serde::{Deserialize, Serialize};

use crate::area::{area_dispatch, AreaConfig, AreaEstimate, AreaGrade};
use crate::chains::PathSample;
use crate::combing::Combing;
use crate::error::{Error, Result};
use crate::model::{GroupModel, NormalForm};
use crate::word::Word;

/// The increments `g_i` and the closing element `x_0^-1 x_n`.
pub fn increments(model: &GroupModel, path: &PathSample) -> Result<(Vec<NormalForm>, NormalForm)> {
    let incs = path.steps.iter().map(|s| model.evaluate(s)).collect::<Result<Vec<_>>>()?;
    Ok((incs, path.displacement(model)?))
}

/// Boundary word `W`, freely reduced. Panics if `W` is not null-homotopic,
/// which would mean the combing is not a right inverse of evaluation.
pub fn fill_word(combing: &Combing, path: &PathSample) -> Result<Word> {
    let model = combing.model();
    let (incs, closing) = increments(model, path)?;
    let mut w = Word::empty();
    for g in &incs {
        w = w.concat(&combing.line(g)?);
    }
    let w = w.concat(&combing.line(&closing)?.invert()).free_reduce();
    assert!(model.is_identity(&w)?, "boundary word of a trajectory must be null-homotopic");
    Ok(w)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FillInstance {
    pub word: Word,
    pub area: AreaEstimate,
}

/// `Fill(x_0, ..., x_n) = Area(W)` through the dispatch oracle.
pub fn fill_area(combing: &Combing, path: &PathSample, cfg: &AreaConfig) -> Result<FillInstance> {
    let word = fill_word(combing, path)?;
    let area = area_dispatch(combing.model(), &word, cfg)?;
    Ok(FillInstance { word, area })
}

/// Nearest vertex of a line to one trajectory point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Projection {
    /// Arc-length parameter of the nearest vertex (smallest on ties).
    pub index: usize,
    pub distance: usize,
}

/// For every trajectory point `x_k`, the nearest vertex of the path that
/// reads `line` from `x_0`.
///
/// One element `x_k^-1 alpha_j` is tracked while `k` and `j` move, so each
/// distance costs a few letter multiplications. Vertices are skipped when
/// `|d(x_0, alpha_j) - d(x_0, x_k)|` already exceeds the best distance.
pub fn line_projections(model: &GroupModel, path: &PathSample, line: &Word) -> Result<Vec<Projection>> {
    let m = line.len();
    let lp = {
        let mut r = model.reducer();
        let mut v = vec![0usize];
        for &l in line.letters() {
            r.push_back(l);
            v.push(r.len()?);
        }
        v
    };
    let mut pre_min = lp.clone();
    let mut pre_max = lp.clone();
    for j in 1..=m {
        pre_min[j] = pre_min[j].min(pre_min[j - 1]);
        pre_max[j] = pre_max[j].max(pre_max[j - 1]);
    }
    let mut suf_min = lp.clone();
    let mut suf_max = lp.clone();
    for j in (0..m).rev() {
        suf_min[j] = suf_min[j].min(suf_min[j + 1]);
        suf_max[j] = suf_max[j].max(suf_max[j + 1]);
    }
    let radii = path.distances_from_start(model)?;

    let mut cur = model.reducer();
    let mut jp = 0usize;
    let move_to = |cur: &mut crate::model::Reducer, jp: &mut usize, j: usize| {
        while *jp < j {
            cur.push_back(line.0[*jp]);
            *jp += 1;
        }
        while *jp > j {
            *jp -= 1;
            cur.push_back(line.0[*jp].inverse());
        }
    };
    let mut out = Vec::with_capacity(path.n() + 1);
    for (k, &target) in radii.iter().enumerate() {
        if k > 0 {
            for &l in path.steps[k - 1].letters() {
                cur.push_front(l.inverse());
            }
        }
        let start = jp;
        let mut best = Projection {
            index: start,
            distance: cur.len()?,
        };
        let far = |lo: usize, hi: usize, d: usize| lo > target + d || hi + d < target;
        let mut j = start;
        while j < m && !far(suf_min[j + 1], suf_max[j + 1], best.distance) {
            j += 1;
            move_to(&mut cur, &mut jp, j);
            let d = cur.len()?;
            if d < best.distance {
                best = Projection { index: j, distance: d };
            }
        }
        let mut j = start;
        while j > 0 && !far(pre_min[j - 1], pre_max[j - 1], best.distance) {
            j -= 1;
            move_to(&mut cur, &mut jp, j);
            let d = cur.len()?;
            if d <= best.distance {
                best = Projection { index: j, distance: d };
            }
        }
        move_to(&mut cur, &mut jp, best.index);
        out.push(best);
    }
    Ok(out)
}

/// First pair `i < j` with `j - i >= c3 ln n` and `c3 d(x_i, x_j) <= j - i`.
pub fn find_slow_pair(model: &GroupModel, path: &PathSample, c3: f64) -> Result<Option<(usize, usize, usize)>> {
    let n = path.n();
    if n < 2 {
        return Ok(None);
    }
    let gap = (c3 * (n as f64).ln()).ceil().max(1.0) as usize;
    for i in 0..n {
        if i + gap > n {
            break;
        }
        let mut r = model.reducer();
        for j in (i + 1)..=n {
            r.push_word_back(&path.steps[j - 1]);
            if j - i >= gap {
                let d = r.len()?;
                if c3 * d as f64 <= (j - i) as f64 {
                    return Ok(Some((i, j, d)));
                }
            }
        }
    }
    Ok(None)
}

/// Constants of the decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorridorParams {
    pub c1: f64,
    pub c3: f64,
    pub d: f64,
    /// Jump bound `K` of the chain.
    pub k: usize,
    /// Checkpoint spacing is `spacing_factor * C1^2 * C3 * D^2 * ln n`.
    pub spacing_factor: f64,
    /// Loop lengths are checked against `cell_scale * K * C1^2 * C3 * D^2 * ln n`.
    pub cell_scale: f64,
}

impl Default for CorridorParams {
    fn default() -> Self {
        CorridorParams {
            c1: 1.0,
            c3: 4.0,
            d: 1.0,
            k: 1,
            spacing_factor: 100.0,
            cell_scale: 300.0,
        }
    }
}

impl CorridorParams {
    fn core(&self) -> f64 {
        self.c1 * self.c1 * self.c3 * self.d * self.d
    }

    /// Checkpoints `k_i = ceil(i * spacing) <= n`.
    pub fn checkpoints(&self, n: usize) -> Vec<usize> {
        if n < 2 {
            return vec![0];
        }
        let spacing = self.spacing_factor * self.core() * (n as f64).ln();
        let mut out = vec![0];
        for i in 1.. {
            let k = (i as f64 * spacing).ceil() as usize;
            if k > n || k <= *out.last().expect("nonempty") {
                break;
            }
            out.push(k);
        }
        out
    }

    pub fn loop_length_bound(&self, n: usize) -> f64 {
        self.cell_scale * self.k as f64 * self.core() * (n.max(2) as f64).ln()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorridorDecomposition {
    pub n: usize,
    /// No checkpoint besides `k_0 = 0`: the single loop is `W` itself.
    pub degenerate: bool,
    /// `k_0 < ... < k_t`.
    pub checkpoints: Vec<usize>,
    /// Loop corners: the checkpoints, followed by `n` when `k_t < n`.
    pub nodes: Vec<usize>,
    /// Projection of every node onto the closing line.
    pub projections: Vec<Projection>,
    /// Geodesic from each node to its projection.
    pub geodesics: Vec<Word>,
    pub closing_line: Word,
    pub loops: Vec<Word>,
    pub loop_areas: Vec<AreaEstimate>,
    pub total_bound: usize,
    pub max_deviation: usize,
    /// Every trajectory point lies within `C1^2 ln n` of the closing line.
    pub flag_a: bool,
    /// No slow pair, see [`find_slow_pair`].
    pub flag_b: bool,
    pub slow_pair: Option<(usize, usize, usize)>,
    pub loop_length_bound: f64,
    pub loops_within_bound: bool,
}

/// Splits the filling loop of `path` into corridor loops along the
/// checkpoints and bounds its area by the sum of the loop areas.
pub fn corridor_decompose(
    combing: &Combing,
    path: &PathSample,
    params: &CorridorParams,
    area: &AreaConfig,
) -> Result<CorridorDecomposition> {
    let model = combing.model();
    let n = path.n();
    let (incs, closing) = increments(model, path)?;
    let line = combing.line(&closing)?;
    let inc_lines = incs.iter().map(|g| combing.line(g)).collect::<Result<Vec<_>>>()?;

    let proj = line_projections(model, path, &line)?;
    let max_deviation = proj.iter().map(|p| p.distance).max().unwrap_or(0);
    let ln_n = (n.max(2) as f64).ln();
    let flag_a = max_deviation as f64 <= params.c1 * params.c1 * ln_n;
    let slow_pair = find_slow_pair(model, path, params.c3)?;
    let flag_b = slow_pair.is_none();

    let checkpoints = params.checkpoints(n);
    let degenerate = checkpoints.len() < 2;
    let mut nodes = checkpoints.clone();
    if *nodes.last().expect("nonempty") < n {
        nodes.push(n);
    }
    let prefix_words: Vec<Word> = {
        let mut acc = Word::empty();
        let mut v = vec![acc.clone()];
        for s in &path.steps {
            acc = acc.concat(s).free_reduce();
            v.push(acc.clone());
        }
        v
    };
    // The line starts at x_0 and ends at x_n, so the end nodes sit on it.
    let projections: Vec<Projection> = nodes
        .iter()
        .map(|&k| match k {
            0 => Projection { index: 0, distance: 0 },
            k if k == n => Projection {
                index: line.len(),
                distance: 0,
            },
            k => proj[k],
        })
        .collect();
    let geodesics = nodes
        .iter()
        .zip(&projections)
        .map(|(&k, p)| {
            let to = prefix_words[k].invert().concat(&line.subword(0, p.index));
            Ok(model.evaluate(&to)?.into_word())
        })
        .collect::<Result<Vec<Word>>>()?;

    let mut loops = Vec::new();
    if degenerate {
        loops.push(fill_word(combing, path)?);
    } else {
        for i in 0..nodes.len() - 1 {
            let (a, b) = (nodes[i], nodes[i + 1]);
            let (pa, pb) = (projections[i].index, projections[i + 1].index);
            let mut w = geodesics[i].invert();
            for l in &inc_lines[a..b] {
                w = w.concat(l);
            }
            w = w.concat(&geodesics[i + 1]);
            w = if pb >= pa {
                w.concat(&line.subword(pa, pb).invert())
            } else {
                w.concat(&line.subword(pb, pa))
            };
            loops.push(w.free_reduce());
        }
    }
    let mut loop_areas = Vec::with_capacity(loops.len());
    for l in &loops {
        let a = area_dispatch(model, l, area)?;
        loop_areas.push(if degenerate {
            AreaEstimate {
                grade: AreaGrade::UpperBound,
                ..a
            }
        } else {
            a
        });
    }
    let total_bound = loop_areas.iter().map(|a| a.value).sum();
    let loop_length_bound = params.loop_length_bound(n);
    let loops_within_bound = loops.iter().all(|l| l.len() as f64 <= loop_length_bound);
    Ok(CorridorDecomposition {
        n,
        degenerate,
        checkpoints,
        nodes,
        projections,
        geodesics,
        closing_line: line,
        loops,
        loop_areas,
        total_bound,
        max_deviation,
        flag_a,
        flag_b,
        slow_pair,
        loop_length_bound,
        loops_within_bound,
    })
}

impl CorridorDecomposition {
    /// Each loop conjugated back to `x_0` along the closing line, multiplied
    /// in order and freely reduced. The connecting geodesics cancel, so the
    /// result is the boundary word `W`.
    pub fn telescoped(&self) -> Word {
        if self.degenerate {
            return self.loops[0].clone();
        }
        let mut out = Word::empty();
        for (i, l) in self.loops.iter().enumerate() {
            let base = self.closing_line.subword(0, self.projections[i].index);
            out = out.concat(&base).concat(l).concat(&base.invert()).free_reduce();
        }
        out
    }
}

/// Outcome of the projection-monotonicity check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimCheck {
    /// Both event flags hold, so the claim has content.
    pub applicable: bool,
    pub holds: bool,
}

/// Whether the projections of the checkpoints `k_0, ..., k_t` have
/// strictly increasing arc-length parameters. Vacuously true unless both
/// event flags hold.
pub fn claim_projections_increasing(decomp: &CorridorDecomposition) -> ClaimCheck {
    if !(decomp.flag_a && decomp.flag_b) {
        return ClaimCheck {
            applicable: false,
            holds: true,
        };
    }
    let t = decomp.checkpoints.len();
    let holds = decomp.projections[..t].windows(2).all(|w| w[0].index < w[1].index);
    ClaimCheck {
        applicable: true,
        holds,
    }
}

/// Checks that a decomposition's loops rebuild `W`, returning an error
/// naming the mismatch otherwise.
pub fn verify_telescoping(decomp: &CorridorDecomposition, w: &Word) -> Result<()> {
    if decomp.telescoped() == w.free_reduce() {
        Ok(())
    } else {
        Err(Error::InvalidInput("corridor loops do not rebuild the boundary word".into()))
    }
}
