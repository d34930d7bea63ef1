//! Landmark affinity propagation.
//!
//! 1. AP clusters a uniform random sample of landmark points.
//! 2. Each landmark class gets a radius: the largest dissimilarity from a
//!    member to its exemplar. A remaining point joins its nearest landmark
//!    exemplar only when it lies strictly inside that exemplar's radius.
//! 3. Points left over are clustered with plain AP when there are at most
//!    `m0` of them, and by another landmark level otherwise.
//! 4. The union of all exemplars is polished by [`refine`].
//!
//! Dissimilarity is `-s(i, k)`, so the procedure works for any similarity
//! matrix, not only Euclidean ones.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{argmax, run_affinity_propagation, ApConfig, ClusteringResult};
use crate::error::{invalid, Result};
use crate::similarity::SimilarityMatrix;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LapConfig {
    /// Landmarks sampled at the top level.
    pub num_landmarks: usize,
    /// Largest leftover set handed directly to AP.
    pub m0: usize,
    /// Number of landmark levels allowed before falling back to AP.
    pub max_depth: usize,
    pub refine_sweeps: usize,
    pub seed: u64,
    pub inner: ApConfig,
}

impl Default for LapConfig {
    fn default() -> Self {
        Self {
            num_landmarks: 100,
            m0: 5000,
            max_depth: 3,
            refine_sweeps: 20,
            seed: 0,
            inner: ApConfig::default(),
        }
    }
}

impl LapConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.num_landmarks == 0 || self.num_landmarks >= n {
            return Err(invalid("num_landmarks", "must satisfy 0 < landmarks < n"));
        }
        if self.m0 < 2 {
            return Err(invalid("m0", "must be at least 2"));
        }
        if self.max_depth == 0 {
            return Err(invalid("max_depth", "must be at least 1"));
        }
        self.inner.validate()
    }
}

/// Sorted landmark indices drawn without replacement.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LandmarkPlan {
    pub landmark_indices: Vec<usize>,
    pub sample_seed: u64,
}

pub fn sample_landmarks(n: usize, k: usize, seed: u64) -> Result<LandmarkPlan> {
    if k == 0 || k >= n {
        return Err(invalid("num_landmarks", "must satisfy 0 < landmarks < n"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut landmark_indices = rand::seq::index::sample(&mut rng, n, k).into_vec();
    landmark_indices.sort_unstable();
    Ok(LandmarkPlan {
        landmark_indices,
        sample_seed: seed,
    })
}

/// Per-exemplar radius, parallel to a sorted exemplar list.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRadii {
    pub exemplars: Vec<usize>,
    pub radii: Vec<f64>,
}

impl ClassRadii {
    pub fn radius(&self, exemplar: usize) -> Option<f64> {
        self.exemplars.binary_search(&exemplar).ok().map(|p| self.radii[p])
    }

    /// Relabels exemplars through `map` (e.g. local to global indices).
    /// `map` must be increasing so the list stays sorted.
    pub fn mapped(&self, map: impl Fn(usize) -> usize) -> Self {
        Self {
            exemplars: self.exemplars.iter().map(|&e| map(e)).collect(),
            radii: self.radii.clone(),
        }
    }
}

/// Largest member-to-exemplar dissimilarity of each class; 0 for singletons.
pub fn class_radii(result: &ClusteringResult, delta: impl Fn(usize, usize) -> f64) -> ClassRadii {
    let mut radii = vec![0.0_f64; result.exemplars.len()];
    for (i, &e) in result.idx.iter().enumerate() {
        if i == e {
            continue;
        }
        if let Ok(p) = result.exemplars.binary_search(&e) {
            radii[p] = radii[p].max(delta(i, e));
        }
    }
    ClassRadii {
        exemplars: result.exemplars.clone(),
        radii,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Embedding {
    /// `(point, exemplar)` pairs that passed the radius test.
    pub assigned: Vec<(usize, usize)>,
    pub leftovers: Vec<usize>,
}

/// Assigns each point to its nearest exemplar (lowest index on ties) when it
/// lies strictly inside that exemplar's radius; the rest are leftovers.
pub fn embed_points(points: &[usize], radii: &ClassRadii, delta: impl Fn(usize, usize) -> f64) -> Embedding {
    let mut out = Embedding::default();
    if radii.exemplars.is_empty() {
        out.leftovers = points.to_vec();
        return out;
    }
    for &i in points {
        let nearest = argmax(radii.exemplars.iter().map(|&e| -delta(i, e)));
        let e = radii.exemplars[nearest];
        if delta(i, e) < radii.radii[nearest] {
            out.assigned.push((i, e));
        } else {
            out.leftovers.push(i);
        }
    }
    out
}

/// Outcome of alternating assignment / medoid sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub result: ClusteringResult,
    pub sweeps: usize,
    /// Net similarity of the starting configuration and after each sweep that
    /// changed the exemplar set.
    pub netsim_trace: Vec<f64>,
}

/// Polishes an exemplar set. Each sweep moves every exemplar to the member of
/// its cluster with the largest summed similarity from the cluster (the
/// exemplar's own term being its preference), then reassigns all points to
/// their most similar exemplar. Stops when the set is unchanged or after
/// `max_sweeps` sweeps. Net similarity never decreases and the number of
/// exemplars is kept.
pub fn refine(s: &SimilarityMatrix, exemplars: &[usize], max_sweeps: usize) -> Result<Refinement> {
    let mut current = ClusteringResult::from_exemplars(s, exemplars)?;
    let mut netsim_trace = vec![current.netsim];
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let next = medoids(s, &current);
        if next == current.exemplars {
            break;
        }
        current = ClusteringResult::from_exemplars(s, &next)?;
        netsim_trace.push(current.netsim);
    }
    Ok(Refinement {
        result: current,
        sweeps,
        netsim_trace,
    })
}

fn medoids(s: &SimilarityMatrix, config: &ClusteringResult) -> Vec<usize> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); config.exemplars.len()];
    for (i, e) in config.idx.iter().enumerate() {
        // Valid configurations only reference listed exemplars.
        let p = config.exemplars.binary_search(e).expect("valid configuration");
        members[p].push(i);
    }
    let score = |cluster: &[usize], m: usize| cluster.iter().map(|&i| s.get(i, m)).sum::<f64>();
    let mut out: Vec<usize> = config
        .exemplars
        .iter()
        .zip(&members)
        .map(|(&e, cluster)| {
            let mut best = e;
            let mut best_score = score(cluster, e);
            for &m in cluster {
                let v = score(cluster, m);
                if v > best_score {
                    best = m;
                    best_score = v;
                }
            }
            best
        })
        .collect();
    out.sort_unstable();
    out
}

/// Bookkeeping for one landmark level.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelReport {
    pub depth: usize,
    /// Points handled at this level.
    pub points: usize,
    pub landmarks: usize,
    pub landmark_iterations: usize,
    pub landmark_exemplars: usize,
    pub embedded: usize,
    pub leftovers: usize,
}

#[derive(Debug, Clone)]
pub struct LapRun {
    /// Final configuration. `iterations` sums every AP phase and `converged`
    /// holds only if all of them converged.
    pub result: ClusteringResult,
    pub levels: Vec<LevelReport>,
    /// Iterations of the closing AP run on leftovers, if one happened.
    pub leftover_iterations: Option<usize>,
    pub refine_sweeps: usize,
    pub refine_trace: Vec<f64>,
    pub message_ops: u64,
}

struct Phases {
    levels: Vec<LevelReport>,
    leftover_iterations: Option<usize>,
    iterations: usize,
    converged: bool,
    message_ops: u64,
}

pub fn lap_cluster(s: &SimilarityMatrix, cfg: &LapConfig) -> Result<LapRun> {
    let n = s.n();
    if n == 1 {
        // No landmark sample is possible; the point is its own exemplar.
        let result = ClusteringResult::from_exemplars(s, &[0])?;
        let refine_trace = vec![result.netsim];
        return Ok(LapRun {
            result,
            levels: Vec::new(),
            leftover_iterations: None,
            refine_sweeps: 0,
            refine_trace,
            message_ops: 0,
        });
    }
    cfg.validate(n)?;
    let mut phases = Phases {
        levels: Vec::new(),
        leftover_iterations: None,
        iterations: 0,
        converged: true,
        message_ops: 0,
    };
    let all: Vec<usize> = (0..n).collect();
    let exemplars = landmark_level(s, &all, cfg.num_landmarks, cfg, 0, &mut phases)?;
    let refined = refine(s, &exemplars, cfg.refine_sweeps)?;
    let mut result = refined.result;
    result.iterations = phases.iterations;
    result.converged = phases.converged;
    Ok(LapRun {
        result,
        levels: phases.levels,
        leftover_iterations: phases.leftover_iterations,
        refine_sweeps: refined.sweeps,
        refine_trace: refined.netsim_trace,
        message_ops: phases.message_ops,
    })
}

fn level_seed(seed: u64, depth: usize) -> u64 {
    seed.wrapping_add(0x9E37_79B9_7F4A_7C15_u64.wrapping_mul(depth as u64))
}

/// AP on the principal submatrix over `points`; returns global exemplars.
fn ap_on(
    s: &SimilarityMatrix,
    points: &[usize],
    cfg: &ApConfig,
    phases: &mut Phases,
) -> Result<(ClusteringResult, Vec<usize>)> {
    let run = run_affinity_propagation(&s.select(points), cfg, None)?;
    phases.iterations += run.result.iterations;
    phases.converged &= run.result.converged;
    phases.message_ops += run.message_ops;
    let global = run.result.exemplars.iter().map(|&e| points[e]).collect();
    Ok((run.result, global))
}

fn landmark_level(
    s: &SimilarityMatrix,
    points: &[usize],
    num_landmarks: usize,
    cfg: &LapConfig,
    depth: usize,
    phases: &mut Phases,
) -> Result<Vec<usize>> {
    let plan = sample_landmarks(points.len(), num_landmarks, level_seed(cfg.seed, depth))?;
    let landmarks: Vec<usize> = plan.landmark_indices.iter().map(|&p| points[p]).collect();
    let (local, mut exemplars) = ap_on(s, &landmarks, &cfg.inner, phases)?;
    let landmark_iterations = local.iterations;

    let radii = class_radii(&local, |i, e| s.dissimilarity(landmarks[i], landmarks[e])).mapped(|e| landmarks[e]);
    let mut is_landmark = vec![false; points.len()];
    plan.landmark_indices.iter().for_each(|&p| is_landmark[p] = true);
    let rest: Vec<usize> = points
        .iter()
        .zip(&is_landmark)
        .filter_map(|(&i, &l)| (!l).then_some(i))
        .collect();
    let embedding = embed_points(&rest, &radii, |i, e| s.dissimilarity(i, e));
    let leftovers = embedding.leftovers;
    phases.levels.push(LevelReport {
        depth,
        points: points.len(),
        landmarks: landmarks.len(),
        landmark_iterations,
        landmark_exemplars: exemplars.len(),
        embedded: embedding.assigned.len(),
        leftovers: leftovers.len(),
    });

    let m = leftovers.len();
    if m == 0 {
        return Ok(exemplars);
    }
    let next_landmarks = (num_landmarks * m).div_ceil(points.len()).max(2);
    let extra = if m <= cfg.m0 || depth + 1 >= cfg.max_depth || next_landmarks >= m {
        let (run, global) = ap_on(s, &leftovers, &cfg.inner, phases)?;
        phases.leftover_iterations = Some(run.iterations);
        global
    } else {
        landmark_level(s, &leftovers, next_landmarks, cfg, depth + 1, phases)?
    };
    exemplars.extend(extra);
    exemplars.sort_unstable();
    if exemplars.windows(2).any(|w| w[0] == w[1]) {
        // Landmark and leftover sets are disjoint.
        return Err(invalid("exemplars", "duplicate exemplar after merge"));
    }
    Ok(exemplars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::{install_preferences, neg_sq_euclidean, PointSet, PreferenceSpec};
    use rand::Rng;

    fn random_points(n: usize, seed: u64) -> SimilarityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
        let s = neg_sq_euclidean(&PointSet::new(rows).unwrap()).unwrap();
        install_preferences(s, &PreferenceSpec::Median).unwrap()
    }

    #[test]
    fn single_point_is_its_own_exemplar() {
        let s = SimilarityMatrix::from_rows(&[vec![-2.0]]).unwrap();
        let run = lap_cluster(&s, &LapConfig::default()).unwrap();
        assert_eq!((run.result.idx, run.result.netsim), (vec![0], -2.0));
        assert!(run.levels.is_empty());
    }

    #[test]
    fn landmark_sampling() {
        let p = sample_landmarks(10, 9, 4).unwrap();
        assert_eq!(p.landmark_indices.len(), 9);
        assert!(p.landmark_indices.windows(2).all(|w| w[0] < w[1]));
        assert!(p.landmark_indices.iter().all(|&i| i < 10));
        assert_eq!(p, sample_landmarks(10, 9, 4).unwrap());
        assert!(sample_landmarks(10, 10, 0).is_err());
        assert!(sample_landmarks(10, 0, 0).is_err());
    }

    #[test]
    fn landmark_sampling_is_uniform() {
        let (n, k, draws) = (1000, 100, 10_000u64);
        let mut counts = vec![0u64; n];
        for seed in 0..draws {
            for i in sample_landmarks(n, k, seed).unwrap().landmark_indices {
                counts[i] += 1;
            }
        }
        let p = k as f64 / n as f64;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        assert!(counts.iter().all(|&c| (c as f64 - mean).abs() <= 4.0 * sigma));
    }

    fn config(idx: Vec<usize>) -> ClusteringResult {
        let mut exemplars: Vec<usize> = idx.clone();
        exemplars.sort_unstable();
        exemplars.dedup();
        ClusteringResult {
            idx,
            exemplars,
            dpsim: 0.0,
            expref: 0.0,
            netsim: 0.0,
            iterations: 0,
            converged: true,
        }
    }

    #[test]
    fn radii_by_hand() {
        let r = class_radii(&config(vec![0, 1, 1]), |i, e| if (i, e) == (2, 1) { 7.0 } else { 99.0 });
        assert_eq!(r.radius(0), Some(0.0));
        assert_eq!(r.radius(1), Some(7.0));
        assert_eq!(r.radius(2), None);
    }

    #[test]
    fn radii_match_direct_scan() {
        let s = random_points(40, 2);
        let res = crate::affinity_propagation(&s, &ApConfig::default(), None).unwrap();
        let r = class_radii(&res, |i, e| s.dissimilarity(i, e));
        for &e in &res.exemplars {
            let mut expect = 0.0_f64;
            for i in 0..40 {
                if i != e && res.idx[i] == e {
                    expect = expect.max(-s.get(i, e));
                }
            }
            assert_eq!(r.radius(e), Some(expect));
        }
    }

    #[test]
    fn embedding_rules() {
        let radii = ClassRadii {
            exemplars: vec![10, 20],
            radii: vec![2.0, 50.0],
        };
        let delta = |i: usize, e: usize| match (i, e) {
            (0, 10) => 1.0,
            (0, 20) => 9.0,
            (1, 10) => 3.0,
            (1, 20) => 4.0,
            (2, 10) => 2.0,
            _ => 100.0,
        };
        let emb = embed_points(&[0, 1, 2], &radii, delta);
        assert_eq!(emb.assigned, vec![(0, 10)]);
        // Point 1's nearest exemplar is 10 at 3 > 2, point 2 sits on the boundary.
        assert_eq!(emb.leftovers, vec![1, 2]);

        let zero = ClassRadii {
            exemplars: vec![10, 20],
            radii: vec![0.0, 0.0],
        };
        let emb = embed_points(&[0, 1, 2], &zero, delta);
        assert!(emb.assigned.is_empty());
        assert_eq!(emb.leftovers.len(), 3);
    }

    #[test]
    fn refine_fixed_point_and_single_medoid() {
        let s = random_points(30, 5);
        let one = refine(&s, &[0], 10).unwrap();
        let score = |m: usize| (0..30).map(|i| s.get(i, m)).sum::<f64>();
        let mut best = 0;
        for m in 1..30 {
            if score(m) > score(best) {
                best = m;
            }
        }
        assert_eq!(one.result.exemplars, vec![best]);
        let again = refine(&s, &one.result.exemplars, 10).unwrap();
        assert_eq!(again.sweeps, 1);
        assert_eq!(again.result.exemplars, one.result.exemplars);
    }

    #[test]
    fn refine_is_monotone() {
        let s = random_points(80, 6);
        let r = refine(&s, &[0, 1, 2, 3, 4, 5], 50).unwrap();
        assert!(r.netsim_trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        assert_eq!(r.result.num_clusters(), 6);
        assert!(r.sweeps <= 50);
        assert!(refine(&s, &[], 3).is_err());
    }

    #[test]
    fn lap_runs_are_valid_and_deterministic() {
        let s = random_points(300, 7);
        let cfg = LapConfig {
            num_landmarks: 60,
            seed: 3,
            ..LapConfig::default()
        };
        let a = lap_cluster(&s, &cfg).unwrap();
        let b = lap_cluster(&s, &cfg).unwrap();
        assert_eq!(a.result, b.result);
        assert!(a.result.is_valid_configuration());
        assert!((a.result.netsim - (a.result.dpsim + a.result.expref)).abs() < 1e-9);
        assert!(a.refine_trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        assert_eq!(a.levels[0].landmarks, 60);
        assert_eq!(a.levels[0].embedded + a.levels[0].leftovers, 240);
    }

    #[test]
    fn recursion_kicks_in_above_m0() {
        let s = random_points(400, 8);
        let cfg = LapConfig {
            num_landmarks: 20,
            m0: 2,
            max_depth: 3,
            seed: 1,
            ..LapConfig::default()
        };
        let run = lap_cluster(&s, &cfg).unwrap();
        assert!(run.levels.len() > 1);
        assert!(run.levels.len() <= 3);
        assert!(run.result.is_valid_configuration());
        for w in run.levels.windows(2) {
            assert_eq!(w[1].points, w[0].leftovers);
        }
    }

    #[test]
    fn nearly_all_landmarks() {
        let s = random_points(25, 9);
        let cfg = LapConfig {
            num_landmarks: 24,
            refine_sweeps: 0,
            ..LapConfig::default()
        };
        let run = lap_cluster(&s, &cfg).unwrap();
        assert_eq!(run.levels[0].embedded + run.levels[0].leftovers, 1);
        assert!(run.result.is_valid_configuration());
        assert!(lap_cluster(
            &s,
            &LapConfig {
                num_landmarks: 25,
                ..cfg.clone()
            }
        )
        .is_err());
        assert!(lap_cluster(&s, &LapConfig { m0: 1, ..cfg }).is_err());
    }

    #[test]
    fn fewer_message_updates_than_full_ap() {
        let s = random_points(400, 10);
        let full = crate::run_affinity_propagation(&s, &ApConfig::default(), None).unwrap();
        let run = lap_cluster(
            &s,
            &LapConfig {
                num_landmarks: 200,
                ..LapConfig::default()
            },
        )
        .unwrap();
        assert!(run.message_ops < full.message_ops);
    }
}
