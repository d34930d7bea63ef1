//! Affinity propagation message passing.
//!
//! Each iteration updates the responsibility matrix and then the availability
//! matrix, both damped as `lambda * old + (1 - lambda) * prescribed`. The run
//! stops once every point's decision (the argmax of `a(i, k) + r(i, k)` over
//! `k`) has been unchanged for `convits` consecutive iterations, or after
//! `max_iter` iterations.
//!
//! Both updates use the usual O(n^2) reductions: the top two values of each
//! row of `a + s` for responsibilities and the positive column sums of `r` for
//! availabilities. Reductions run in a fixed order so results are bitwise
//! reproducible.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::matrix::SquareMatrix;
use crate::similarity::SimilarityMatrix;

/// Seeded symmetric noise added to the off-diagonal similarities before
/// message passing. Accounting always uses the unperturbed matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Jitter {
    /// Noise amplitude relative to the range of the off-diagonal entries.
    pub scale: f64,
    pub seed: u64,
}

impl Default for Jitter {
    fn default() -> Self {
        Self { scale: 1e-12, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ApConfig {
    /// Damping factor, `0.5 <= lambda < 1`.
    pub lambda: f64,
    pub max_iter: usize,
    /// Number of consecutive iterations with unchanged decisions that ends a run.
    pub convits: usize,
    pub jitter: Option<Jitter>,
    /// Record the net similarity of the current decisions after every iteration.
    pub trace: bool,
}

impl Default for ApConfig {
    fn default() -> Self {
        Self {
            lambda: 0.5,
            max_iter: 1000,
            convits: 50,
            jitter: None,
            trace: false,
        }
    }
}

impl ApConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.5 && self.lambda < 1.0) {
            return Err(invalid("lambda", "damping must lie in [0.5, 1)"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be positive"));
        }
        if self.convits == 0 || self.convits >= self.max_iter {
            return Err(invalid("convits", "must be positive and below max_iter"));
        }
        if let Some(j) = self.jitter {
            if !(j.scale.is_finite() && j.scale >= 0.0) {
                return Err(invalid("jitter", "scale must be finite and nonnegative"));
            }
        }
        Ok(())
    }
}

/// Responsibilities `r(i, k)` and availabilities `a(i, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageState {
    pub responsibilities: SquareMatrix,
    pub availabilities: SquareMatrix,
}

impl MessageState {
    pub fn zeros(n: usize) -> Self {
        Self {
            responsibilities: SquareMatrix::zeros(n),
            availabilities: SquareMatrix::zeros(n),
        }
    }

    /// Zero responsibilities with the given starting availabilities.
    pub fn with_availabilities(availabilities: SquareMatrix) -> Self {
        Self {
            responsibilities: SquareMatrix::zeros(availabilities.n()),
            availabilities,
        }
    }

    pub fn n(&self) -> usize {
        self.responsibilities.n()
    }

    fn check(&self, n: usize) -> Result<()> {
        for m in [&self.responsibilities, &self.availabilities] {
            if m.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.n(),
                });
            }
        }
        Ok(())
    }

    /// Per-point decision: the lowest `k` maximizing `a(i, k) + r(i, k)`.
    pub fn decisions(&self) -> Vec<usize> {
        (0..self.n())
            .map(|i| {
                let r = self.responsibilities.row(i);
                let a = self.availabilities.row(i);
                argmax(r.iter().zip(a).map(|(r, a)| r + a))
            })
            .collect()
    }
}

/// Outcome of one clustering run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClusteringResult {
    /// Exemplar of every point.
    pub idx: Vec<usize>,
    /// Sorted exemplar indices.
    pub exemplars: Vec<usize>,
    /// Sum of similarities of non-exemplars to their exemplars.
    pub dpsim: f64,
    /// Sum of exemplar preferences.
    pub expref: f64,
    /// `dpsim + expref`.
    pub netsim: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl ClusteringResult {
    /// Configuration induced by an exemplar set: exemplars label themselves and
    /// every other point joins its most similar exemplar (lowest index on
    /// ties). `iterations` is 0 and `converged` is true.
    pub fn from_exemplars(s: &SimilarityMatrix, exemplars: &[usize]) -> Result<Self> {
        let n = s.n();
        let mut ex = exemplars.to_vec();
        ex.sort_unstable();
        ex.dedup();
        if ex.is_empty() {
            return Err(Error::Empty("exemplar set"));
        }
        if let Some(&bad) = ex.iter().find(|&&e| e >= n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad + 1,
            });
        }
        let mut is_exemplar = vec![false; n];
        ex.iter().for_each(|&e| is_exemplar[e] = true);
        let mut idx = Vec::with_capacity(n);
        let mut dpsim = 0.0;
        for (i, &own) in is_exemplar.iter().enumerate() {
            if own {
                idx.push(i);
                continue;
            }
            let row = s.row(i);
            let best = ex[argmax(ex.iter().map(|&e| row[e]))];
            dpsim += row[best];
            idx.push(best);
        }
        let expref = ex.iter().map(|&e| s.preference(e)).sum::<f64>();
        Ok(Self {
            idx,
            exemplars: ex,
            dpsim,
            expref,
            netsim: dpsim + expref,
            iterations: 0,
            converged: true,
        })
    }

    pub fn num_clusters(&self) -> usize {
        self.exemplars.len()
    }

    /// True when every point's exemplar labels itself and every exemplar is
    /// listed in `exemplars`.
    pub fn is_valid_configuration(&self) -> bool {
        self.idx.iter().all(|&e| e < self.idx.len() && self.idx[e] == e)
            && self.exemplars.iter().all(|&e| self.idx.get(e) == Some(&e))
            && self.idx.iter().all(|e| self.exemplars.binary_search(e).is_ok())
    }
}

/// A finished run together with its final messages and bookkeeping.
#[derive(Debug, Clone)]
pub struct ApRun {
    pub result: ClusteringResult,
    pub state: MessageState,
    /// Matrix elements written by message updates (`2 n^2` per iteration).
    pub message_ops: u64,
    /// Net similarity after every iteration, when tracing is enabled.
    pub netsim_trace: Vec<f64>,
}

/// Lowest index of the maximum value. NaN never wins.
pub(crate) fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (k, v) in values.enumerate() {
        if v > best_val || k == 0 {
            best = k;
            best_val = v;
        }
    }
    best
}

/// `max_k (a[k] + b[k])` over equal-length slices; `-inf` when empty.
#[inline]
fn max_of_sums(a: &[f64], b: &[f64]) -> f64 {
    const LANES: usize = 4;
    let mut acc = [f64::NEG_INFINITY; LANES];
    let (ca, cb) = (a.chunks_exact(LANES), b.chunks_exact(LANES));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (xa, xb) in ca.zip(cb) {
        for j in 0..LANES {
            let v = xa[j] + xb[j];
            acc[j] = if v > acc[j] { v } else { acc[j] };
        }
    }
    let mut m = acc
        .into_iter()
        .fold(f64::NEG_INFINITY, |m, v| if v > m { v } else { m });
    for (x, y) in ra.iter().zip(rb) {
        let v = x + y;
        m = if v > m { v } else { m };
    }
    m
}

/// Largest and second-largest of `a[k] + b[k]`, with the lowest index of the
/// largest. Repeated maxima make both values equal.
#[inline]
fn top_two_of_sums(a: &[f64], b: &[f64]) -> (f64, usize, f64) {
    let first = max_of_sums(a, b);
    let first_k = a.iter().zip(b).position(|(x, y)| x + y == first).unwrap_or(0);
    let second = max_of_sums(&a[..first_k], &b[..first_k]).max(max_of_sums(&a[first_k + 1..], &b[first_k + 1..]));
    (first, first_k, second)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(invalid("lambda", "damping must lie in [0, 1]"))
    }
}

/// Column reductions of the responsibility matrix used by the availability
/// update: `positive[k] = sum_{i != k} max(0, r(i,k))` and `diag[k] = r(k,k)`.
struct Reductions {
    positive: Vec<f64>,
    diag: Vec<f64>,
}

impl Reductions {
    fn new(n: usize) -> Self {
        Self {
            positive: vec![0.0; n],
            diag: vec![0.0; n],
        }
    }

    fn reset(&mut self) {
        self.positive.fill(0.0);
    }

    /// Adds row `i` of `r`, rows arriving in increasing order.
    #[inline]
    fn accumulate(&mut self, i: usize, rrow: &[f64]) {
        let (before, rest) = rrow.split_at(i);
        let (pos_before, pos_rest) = self.positive.split_at_mut(i);
        for (acc, r) in pos_before.iter_mut().zip(before) {
            *acc += r.max(0.0);
        }
        for (acc, r) in pos_rest[1..].iter_mut().zip(&rest[1..]) {
            *acc += r.max(0.0);
        }
        self.diag[i] = rest[0];
    }

    fn from_responsibilities(r: &SquareMatrix) -> Self {
        let mut red = Self::new(r.n());
        for i in 0..r.n() {
            red.accumulate(i, r.row(i));
        }
        red
    }
}

/// Responsibility sweep over all rows. When `reductions` is given it is
/// refilled from the updated rows.
fn responsibility_sweep(
    s: &SimilarityMatrix,
    state: &mut MessageState,
    lambda: f64,
    mut reductions: Option<&mut Reductions>,
) {
    let n = s.n();
    let keep = 1.0 - lambda;
    let MessageState {
        responsibilities,
        availabilities,
    } = state;
    if let Some(red) = reductions.as_deref_mut() {
        red.reset();
    }
    for i in 0..n {
        let srow = s.row(i);
        let arow = availabilities.row(i);
        let (first, first_k, second) = top_two_of_sums(arow, srow);
        let rrow = responsibilities.row_mut(i);
        if n == 1 {
            rrow[0] = lambda * rrow[0] + keep * srow[0];
        } else {
            let old = rrow[first_k];
            for (r, &sv) in rrow.iter_mut().zip(srow) {
                *r = lambda * *r + keep * (sv - first);
            }
            rrow[first_k] = lambda * old + keep * (srow[first_k] - second);
        }
        if let Some(red) = reductions.as_deref_mut() {
            red.accumulate(i, rrow);
        }
    }
}

/// Availability sweep over all rows. When `decisions` is given it receives
/// the argmax of `a + r` of every updated row.
fn availability_sweep(state: &mut MessageState, lambda: f64, red: &Reductions, mut decisions: Option<&mut [usize]>) {
    let n = state.n();
    let keep = 1.0 - lambda;
    let MessageState {
        responsibilities,
        availabilities,
    } = state;
    let base: Vec<f64> = red.diag.iter().zip(&red.positive).map(|(d, p)| d + p).collect();
    for i in 0..n {
        let rrow = responsibilities.row(i);
        let arow = availabilities.row_mut(i);
        let old = arow[i];
        for ((a, &r), &b) in arow.iter_mut().zip(rrow).zip(&base) {
            *a = lambda * *a + keep * (b - r.max(0.0)).min(0.0);
        }
        arow[i] = lambda * old + keep * red.positive[i];
        if let Some(d) = decisions.as_deref_mut() {
            let best = max_of_sums(rrow, arow);
            d[i] = rrow
                .iter()
                .zip(arow.iter())
                .position(|(r, a)| r + a == best)
                .unwrap_or(0);
        }
    }
}

/// One damped responsibility sweep:
/// `r(i,k) <- lambda r(i,k) + (1 - lambda) (s(i,k) - max_{k' != k} (a(i,k') + s(i,k')))`.
///
/// With a single point there is no competing candidate and the prescribed
/// value is `s(0, 0)`.
pub fn update_responsibilities(s: &SimilarityMatrix, state: &mut MessageState, lambda: f64) -> Result<()> {
    state.check(s.n())?;
    check_lambda(lambda)?;
    responsibility_sweep(s, state, lambda, None);
    Ok(())
}

/// One damped availability sweep:
/// `a(i,k) <- min(0, r(k,k) + sum_{i' not in {i,k}} max(0, r(i',k)))` for
/// `i != k` and `a(k,k) <- sum_{i' != k} max(0, r(i',k))`, each damped.
pub fn update_availabilities(state: &mut MessageState, lambda: f64) -> Result<()> {
    state.check(state.n())?;
    check_lambda(lambda)?;
    let red = Reductions::from_responsibilities(&state.responsibilities);
    availability_sweep(state, lambda, &red, None);
    Ok(())
}

/// Reads the clustering out of the current messages.
///
/// Exemplars are the points whose own decision picks themselves; if there are
/// none, the single point maximizing `a(k,k) + r(k,k)` is used. Everything else
/// is assigned by similarity via [`ClusteringResult::from_exemplars`].
pub fn extract_result(s: &SimilarityMatrix, state: &MessageState) -> Result<ClusteringResult> {
    let n = s.n();
    state.check(n)?;
    let mut exemplars: Vec<usize> = state
        .decisions()
        .into_iter()
        .enumerate()
        .filter_map(|(i, d)| (i == d).then_some(i))
        .collect();
    if exemplars.is_empty() {
        let r = &state.responsibilities;
        let a = &state.availabilities;
        exemplars.push(argmax((0..n).map(|k| r.get(k, k) + a.get(k, k))));
    }
    ClusteringResult::from_exemplars(s, &exemplars)
}

/// Energy `-sum_i s(i, idx[i])` of a valid configuration, where exemplars
/// contribute their preference.
pub fn energy(s: &SimilarityMatrix, idx: &[usize]) -> Result<f64> {
    let n = s.n();
    if idx.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: idx.len(),
        });
    }
    let mut total = 0.0;
    for (i, &e) in idx.iter().enumerate() {
        if e >= n || idx[e] != e {
            return Err(Error::InvalidConfiguration { point: i, exemplar: e });
        }
        total += s.get(i, e);
    }
    Ok(-total)
}

/// Runs affinity propagation and returns only the clustering.
pub fn affinity_propagation(
    s: &SimilarityMatrix,
    cfg: &ApConfig,
    warm_availabilities: Option<&SquareMatrix>,
) -> Result<ClusteringResult> {
    run_affinity_propagation(s, cfg, warm_availabilities).map(|run| run.result)
}

/// Runs affinity propagation from zero availabilities, or from
/// `warm_availabilities` when given. Responsibilities always start at zero.
pub fn run_affinity_propagation(
    s: &SimilarityMatrix,
    cfg: &ApConfig,
    warm_availabilities: Option<&SquareMatrix>,
) -> Result<ApRun> {
    cfg.validate()?;
    let n = s.n();
    let state = match warm_availabilities {
        Some(a) => {
            if a.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: a.n(),
                });
            }
            if let Some((row, col)) = a.first_non_finite() {
                return Err(Error::NonFinite { row, col });
            }
            MessageState::with_availabilities(a.clone())
        }
        None => MessageState::zeros(n),
    };
    if n == 1 {
        let result = ClusteringResult::from_exemplars(s, &[0])?;
        let netsim_trace = if cfg.trace { vec![result.netsim] } else { Vec::new() };
        return Ok(ApRun {
            result,
            state,
            message_ops: 0,
            netsim_trace,
        });
    }

    let jittered = cfg.jitter.map(|j| s.jittered(j.scale, j.seed));
    let working = jittered.as_ref().unwrap_or(s);
    let mut state = state;
    let mut previous: Option<Vec<usize>> = None;
    let mut stable = 0;
    let mut iterations = 0;
    let mut converged = false;
    let mut netsim_trace = Vec::new();
    let mut reductions = Reductions::new(n);
    let mut decisions = vec![0; n];
    while iterations < cfg.max_iter {
        iterations += 1;
        responsibility_sweep(working, &mut state, cfg.lambda, Some(&mut reductions));
        availability_sweep(&mut state, cfg.lambda, &reductions, Some(&mut decisions));
        if previous.as_ref() == Some(&decisions) {
            stable += 1;
        } else {
            stable = 0;
            previous = Some(decisions.clone());
        }
        if cfg.trace {
            netsim_trace.push(extract_result(s, &state)?.netsim);
        }
        let has_exemplar = decisions.iter().enumerate().any(|(i, &d)| i == d);
        if stable >= cfg.convits && has_exemplar {
            converged = true;
            break;
        }
    }
    let mut result = extract_result(s, &state)?;
    result.iterations = iterations;
    result.converged = converged;
    let message_ops = 2 * (n as u64) * (n as u64) * iterations as u64;
    Ok(ApRun {
        result,
        state,
        message_ops,
        netsim_trace,
    })
}
