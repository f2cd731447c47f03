//! Graph-based retrofitting of static embeddings over a synonym lexicon.
//!
//! Each lexicon edge `(i, j)` carries a weight from a Student-t kernel of the
//! Euclidean distance between the original vectors,
//! `γ_ij = C_ν (1 + d_ij² / (σ ν))^-(ν+1)`, with
//! `C_ν = 2π (Γ((ν+1)/2) / (√(νπ) Γ(ν/2)))²`. The refined vectors minimise
//!
//! ```text
//! Ψ(Q) = Σ_i ( α ‖q_i − q′_i‖² + β Σ_{j ∈ N(i)} γ_ij ‖q_i − q_j‖² )
//! ```
//!
//! where the inner sum runs over the neighbours of `i`, so each undirected
//! edge contributes once from each endpoint.
//!
//! Two update rules are available. [`RetrofitMode::PaperUpdate`] applies
//! `q_i = α q′_i + β Σ_j γ_ij q_j / m` with `m` the degree of `i`.
//! [`RetrofitMode::ExactMinimizer`] applies the coordinate minimiser of `Ψ`,
//! `q_i = (α q′_i + 2β Σ_j γ_ij q_j) / (α + 2β Σ_j γ_ij)`, which makes every
//! Gauss–Seidel sweep non-increasing in `Ψ`.

use std::collections::BTreeSet;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::embeddings::Embeddings;
use crate::error::{Error, Result};
use crate::linalg::{axpy, squared_distance, Matrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RetrofitMode {
    #[default]
    PaperUpdate,
    ExactMinimizer,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// In-place sweep in ascending node id; later nodes see earlier updates.
    #[default]
    GaussSeidel,
    /// Every node reads the previous sweep; parallelisable.
    Jacobi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetrofitConfig {
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
    pub sigma: f64,
    pub iterations: usize,
    pub mode: RetrofitMode,
    pub schedule: Schedule,
    /// Recompute `γ` from the current vectors before every sweep instead of
    /// once from the originals.
    pub dynamic_weights: bool,
    /// Stop early once the largest coordinate change of a sweep falls below
    /// this value.
    pub tolerance: Option<f64>,
    pub threads: usize,
}

impl Default for RetrofitConfig {
    fn default() -> Self {
        RetrofitConfig {
            alpha: 0.5,
            beta: 0.5,
            nu: 1.0,
            sigma: 1.0,
            iterations: 10,
            mode: RetrofitMode::PaperUpdate,
            schedule: Schedule::GaussSeidel,
            dynamic_weights: false,
            tolerance: None,
            threads: 1,
        }
    }
}

impl RetrofitConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("nu", self.nu),
            ("sigma", self.sigma),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be a finite positive number, got {v}"
                )));
            }
        }
        if self.threads == 0 {
            return Err(Error::InvalidParameter("threads must be at least 1".into()));
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<Kernel> {
        Kernel::new(self.nu, self.sigma)
    }
}

/// `C_ν`, evaluated through log-gamma.
pub fn c_nu(nu: f64) -> Result<f64> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Domain(format!("nu must be a finite positive number, got {nu}")));
    }
    let log_ratio =
        libm::lgamma((nu + 1.0) / 2.0) - 0.5 * (nu * std::f64::consts::PI).ln() - libm::lgamma(nu / 2.0);
    Ok((std::f64::consts::TAU.ln() + 2.0 * log_ratio).exp())
}

/// Student-t kernel mapping distances to edge weights in `(0, C_ν]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kernel {
    nu: f64,
    sigma: f64,
    c_nu: f64,
}

impl Kernel {
    pub fn new(nu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be a finite positive number, got {sigma}")));
        }
        Ok(Kernel {
            nu,
            sigma,
            c_nu: c_nu(nu)?,
        })
    }

    pub fn c_nu(&self) -> f64 {
        self.c_nu
    }

    /// Weight for a squared Euclidean distance.
    pub fn weight_sq(&self, d2: f64) -> f64 {
        self.c_nu * (1.0 + d2 / (self.sigma * self.nu)).powf(-(self.nu + 1.0))
    }

    pub fn weight(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weight_sq(squared_distance(a, b))
    }
}

/// `γ` for a pair of vectors under `config`'s kernel.
pub fn edge_weight(q_i: &[f64], q_j: &[f64], config: &RetrofitConfig) -> Result<f64> {
    if q_i.len() != q_j.len() {
        return Err(Error::DimensionMismatch {
            expected: q_i.len(),
            found: q_j.len(),
        });
    }
    Ok(config.kernel()?.weight(q_i, q_j))
}

/// Synonym lexicon: one head word per line followed by its synonyms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Lexicon {
    pub entries: Vec<(String, Vec<String>)>,
}

impl Lexicon {
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut entries = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let mut words = line.split_whitespace().map(str::to_owned);
            if let Some(head) = words.next() {
                entries.push((head, words.collect()));
            }
        }
        Ok(Lexicon { entries })
    }
}

/// What was dropped while resolving a lexicon against an embedding set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LexiconStats {
    pub lines: usize,
    pub unknown_heads: usize,
    pub unknown_synonyms: usize,
    pub self_loops: usize,
}

/// Undirected graph over embedding rows. Adjacency lists are sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct SynonymGraph {
    adjacency: Vec<Vec<usize>>,
    nodes: Vec<usize>,
    edges: usize,
}

impl SynonymGraph {
    /// Builds from undirected pairs of row indices. Duplicates collapse and
    /// self-loops are dropped.
    pub fn from_edges(rows: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut sets = vec![BTreeSet::new(); rows];
        for &(i, j) in edges {
            if i >= rows || j >= rows {
                return Err(Error::InvalidParameter(format!(
                    "edge ({i}, {j}) outside {rows} rows"
                )));
            }
            if i != j {
                sets[i].insert(j);
                sets[j].insert(i);
            }
        }
        let adjacency: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let nodes = (0..rows).filter(|&i| !adjacency[i].is_empty()).collect();
        let edges = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        Ok(SynonymGraph {
            adjacency,
            nodes,
            edges,
        })
    }

    pub fn from_lexicon(lexicon: &Lexicon, embeddings: &Embeddings) -> (Self, LexiconStats) {
        let mut stats = LexiconStats {
            lines: lexicon.entries.len(),
            ..LexiconStats::default()
        };
        let mut edges = Vec::new();
        for (head, synonyms) in &lexicon.entries {
            let Some(i) = embeddings.index(head) else {
                stats.unknown_heads += 1;
                continue;
            };
            for syn in synonyms {
                match embeddings.index(syn) {
                    Some(j) if j == i => stats.self_loops += 1,
                    Some(j) => edges.push((i, j)),
                    None => stats.unknown_synonyms += 1,
                }
            }
        }
        let graph = SynonymGraph::from_edges(embeddings.len(), &edges).expect("indices come from the embeddings");
        (graph, stats)
    }

    pub fn rows(&self) -> usize {
        self.adjacency.len()
    }

    /// Rows with at least one edge, ascending.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Each undirected edge once, as `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, adj)| adj.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }
}

/// `γ_ij` for every adjacency entry, aligned with [`SynonymGraph::neighbors`].
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeWeights {
    weights: Vec<Vec<f64>>,
}

impl EdgeWeights {
    pub fn compute(graph: &SynonymGraph, vectors: &Matrix, kernel: &Kernel) -> Self {
        let weights = (0..graph.rows())
            .map(|i| {
                graph
                    .neighbors(i)
                    .iter()
                    .map(|&j| kernel.weight(vectors.row(i), vectors.row(j)))
                    .collect()
            })
            .collect();
        EdgeWeights { weights }
    }

    pub fn of(&self, i: usize) -> &[f64] {
        &self.weights[i]
    }
}

/// `Ψ(Q)`.
pub fn objective(
    q: &Matrix,
    q_prime: &Matrix,
    graph: &SynonymGraph,
    weights: &EdgeWeights,
    config: &RetrofitConfig,
) -> f64 {
    let mut total = 0.0;
    for i in 0..q.rows() {
        let mut term = config.alpha * squared_distance(q.row(i), q_prime.row(i));
        let neighbours: f64 = graph
            .neighbors(i)
            .iter()
            .zip(weights.of(i))
            .map(|(&j, &g)| g * squared_distance(q.row(i), q.row(j)))
            .sum();
        term += config.beta * neighbours;
        total += term;
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepStats {
    pub objective: f64,
    pub max_delta: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RetrofitReport {
    pub sweeps: Vec<SweepStats>,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct RefinedEmbeddings {
    /// Refined vectors `Q`.
    pub refined: Embeddings,
    /// Original vectors `Q′`.
    pub original: Embeddings,
    pub report: RetrofitReport,
}

impl RefinedEmbeddings {
    pub fn dim(&self) -> usize {
        self.refined.dim()
    }
}

/// Refines `embeddings` over `graph`. Rows without edges are returned
/// unchanged, bit for bit.
pub fn retrofit(
    embeddings: &Embeddings,
    graph: &SynonymGraph,
    config: &RetrofitConfig,
) -> Result<RefinedEmbeddings> {
    config.validate()?;
    if graph.rows() != embeddings.len() {
        return Err(Error::DimensionMismatch {
            expected: embeddings.len(),
            found: graph.rows(),
        });
    }
    let kernel = config.kernel()?;
    let q_prime = embeddings.matrix();
    let mut q = q_prime.clone();
    let mut weights = EdgeWeights::compute(graph, q_prime, &kernel);
    let mut report = RetrofitReport::default();

    for sweep in 0..config.iterations {
        if config.dynamic_weights && sweep > 0 {
            weights = EdgeWeights::compute(graph, &q, &kernel);
        }
        let max_delta = match config.schedule {
            Schedule::GaussSeidel => gauss_seidel_sweep(&mut q, q_prime, graph, &weights, config),
            Schedule::Jacobi => jacobi_sweep(&mut q, q_prime, graph, &weights, config),
        };
        let psi = objective(&q, q_prime, graph, &weights, config);
        report.sweeps.push(SweepStats {
            objective: psi,
            max_delta,
        });
        if config.tolerance.is_some_and(|tol| max_delta < tol) {
            report.converged = true;
            break;
        }
    }

    Ok(RefinedEmbeddings {
        refined: Embeddings::new(embeddings.words().to_vec(), q)?,
        original: embeddings.clone(),
        report,
    })
}

/// New value of row `i` given the current rows `q`.
fn node_update(
    i: usize,
    q: &Matrix,
    q_prime: &Matrix,
    graph: &SynonymGraph,
    weights: &EdgeWeights,
    config: &RetrofitConfig,
) -> Vec<f64> {
    let mut neighbour_sum = vec![0.0; q.cols()];
    let mut weight_sum = 0.0;
    for (&j, &g) in graph.neighbors(i).iter().zip(weights.of(i)) {
        axpy(g, q.row(j), &mut neighbour_sum);
        weight_sum += g;
    }
    let anchor = q_prime.row(i);
    match config.mode {
        RetrofitMode::PaperUpdate => {
            let m = graph.degree(i) as f64;
            anchor
                .iter()
                .zip(&neighbour_sum)
                .map(|(a, s)| config.alpha * a + config.beta * s / m)
                .collect()
        }
        RetrofitMode::ExactMinimizer => {
            let b = 2.0 * config.beta;
            let denom = config.alpha + b * weight_sum;
            anchor
                .iter()
                .zip(&neighbour_sum)
                .map(|(a, s)| (config.alpha * a + b * s) / denom)
                .collect()
        }
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn gauss_seidel_sweep(
    q: &mut Matrix,
    q_prime: &Matrix,
    graph: &SynonymGraph,
    weights: &EdgeWeights,
    config: &RetrofitConfig,
) -> f64 {
    let mut max_delta = 0.0f64;
    for &i in graph.nodes() {
        let row = node_update(i, q, q_prime, graph, weights, config);
        max_delta = max_delta.max(max_abs_diff(&row, q.row(i)));
        q.row_mut(i).copy_from_slice(&row);
    }
    max_delta
}

fn jacobi_sweep(
    q: &mut Matrix,
    q_prime: &Matrix,
    graph: &SynonymGraph,
    weights: &EdgeWeights,
    config: &RetrofitConfig,
) -> f64 {
    let nodes = graph.nodes();
    let threads = config.threads.min(nodes.len()).max(1);
    let current: &Matrix = q;
    let updates: Vec<(usize, Vec<f64>)> = if threads == 1 {
        nodes
            .iter()
            .map(|&i| (i, node_update(i, current, q_prime, graph, weights, config)))
            .collect()
    } else {
        let chunk = nodes.len().div_ceil(threads);
        std::thread::scope(|scope| {
            let handles: Vec<_> = nodes
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        part.iter()
                            .map(|&i| (i, node_update(i, current, q_prime, graph, weights, config)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("retrofit worker panicked"))
                .collect()
        })
    };
    let mut max_delta = 0.0f64;
    for (i, row) in updates {
        max_delta = max_delta.max(max_abs_diff(&row, q.row(i)));
        q.row_mut(i).copy_from_slice(&row);
    }
    max_delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn emb(rows: &[&[f64]]) -> Embeddings {
        let words = (0..rows.len()).map(|i| format!("w{i}")).collect();
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Embeddings::new(words, Matrix::from_vec(rows.len(), rows[0].len(), data).unwrap()).unwrap()
    }

    #[test]
    fn c_nu_reference_values() {
        assert_relative_eq!(c_nu(1.0).unwrap(), 2.0 / PI, max_relative = 1e-14);
        // Γ(3/2) = √π/2, Γ(1) = 1  =>  C_2 = 2π (1/(2√2))² = π/4
        assert_relative_eq!(c_nu(2.0).unwrap(), PI / 4.0, max_relative = 1e-14);
        assert!(c_nu(0.0).is_err());
        assert!(c_nu(-1.0).is_err());
        assert!(c_nu(f64::NAN).is_err());
    }

    #[test]
    fn kernel_at_unit_distance() {
        let config = RetrofitConfig::default();
        let g = edge_weight(&[0.0, 0.0], &[1.0, 0.0], &config).unwrap();
        assert_relative_eq!(g, 1.0 / (2.0 * PI), max_relative = 1e-14);
        let g0 = edge_weight(&[0.3, 0.4], &[0.3, 0.4], &config).unwrap();
        assert_eq!(g0, c_nu(1.0).unwrap());
        assert!(edge_weight(&[0.0], &[0.0, 1.0], &config).is_err());
    }

    #[test]
    fn graph_is_symmetric_without_self_loops() {
        let g = SynonymGraph::from_edges(4, &[(0, 1), (1, 0), (2, 2), (1, 3)]).unwrap();
        assert_eq!(g.neighbors(1), &[0, 3]);
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.degree(2), 0);
        assert_eq!(g.nodes(), &[0, 1, 3]);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 3)]);
        assert!(SynonymGraph::from_edges(2, &[(0, 5)]).is_err());
    }

    #[test]
    fn lexicon_resolution_counts_unknown_words() {
        let e = emb(&[&[1.0], &[2.0], &[3.0]]);
        let lex = Lexicon::parse("w0 w1 nope w0\nghost w1\n\nw2 w1\n".as_bytes()).unwrap();
        let (g, stats) = SynonymGraph::from_lexicon(&lex, &e);
        assert_eq!(stats.lines, 3);
        assert_eq!(stats.unknown_heads, 1);
        assert_eq!(stats.unknown_synonyms, 1);
        assert_eq!(stats.self_loops, 1);
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn empty_lexicon_is_identity() {
        let e = emb(&[&[1.0, -2.0], &[0.5, 0.25]]);
        let g = SynonymGraph::from_edges(2, &[]).unwrap();
        for mode in [RetrofitMode::PaperUpdate, RetrofitMode::ExactMinimizer] {
            let config = RetrofitConfig {
                mode,
                ..RetrofitConfig::default()
            };
            let r = retrofit(&e, &g, &config).unwrap();
            assert_eq!(r.refined, e);
        }
    }

    #[test]
    fn one_default_update_sweep_on_identical_pair() {
        // identical vectors: γ = C_ν; node 0 updates first from the original
        // node 1, then node 1 sees the already-updated node 0
        let v = [0.8, -0.6];
        let e = emb(&[&v, &v]);
        let g = SynonymGraph::from_edges(2, &[(0, 1)]).unwrap();
        let config = RetrofitConfig {
            iterations: 1,
            ..RetrofitConfig::default()
        };
        let r = retrofit(&e, &g, &config).unwrap();
        let c = c_nu(1.0).unwrap();
        let q0: Vec<f64> = v.iter().map(|x| 0.5 * x + 0.5 * c * x).collect();
        let q1: Vec<f64> = v.iter().zip(&q0).map(|(x, a)| 0.5 * x + 0.5 * c * a).collect();
        for k in 0..2 {
            assert_relative_eq!(r.refined.row(0)[k], q0[k], max_relative = 1e-15);
            assert_relative_eq!(r.refined.row(1)[k], q1[k], max_relative = 1e-15);
        }
    }

    #[test]
    fn objective_two_node_hand_calculation() {
        let q_prime = Matrix::from_vec(2, 2, vec![0.0, 0.0, 3.0, 4.0]).unwrap();
        let q = Matrix::from_vec(2, 2, vec![1.0, 0.0, 3.0, 4.0]).unwrap();
        let g = SynonymGraph::from_edges(2, &[(0, 1)]).unwrap();
        let config = RetrofitConfig::default();
        let w = EdgeWeights::compute(&g, &q_prime, &config.kernel().unwrap());
        let gamma = w.of(0)[0];
        // Q′ distance 5 => γ = (2/π) (1 + 25)^-2
        assert_relative_eq!(gamma, 2.0 / PI / 676.0, max_relative = 1e-14);
        // α‖q0 − q0′‖² = 0.5; edge ‖(1,0) − (3,4)‖² = 20 counted from both ends
        let expected = 0.5 * 1.0 + 0.5 * gamma * 20.0 * 2.0;
        assert_relative_eq!(objective(&q, &q_prime, &g, &w, &config), expected, max_relative = 1e-14);
        assert_eq!(objective(&q_prime, &q_prime, &SynonymGraph::from_edges(2, &[]).unwrap(), &w, &config), 0.0);
    }

    #[test]
    fn identical_vectors_have_zero_objective() {
        let q = Matrix::from_vec(3, 2, vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let g = SynonymGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let config = RetrofitConfig::default();
        let w = EdgeWeights::compute(&g, &q, &config.kernel().unwrap());
        assert_eq!(objective(&q, &q, &g, &w, &config), 0.0);
    }

    #[test]
    fn jacobi_threads_match_single_thread() {
        let e = emb(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0], &[-1.0, 0.5], &[0.2, 0.2]]);
        let g = SynonymGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let base = RetrofitConfig {
            schedule: Schedule::Jacobi,
            mode: RetrofitMode::ExactMinimizer,
            ..RetrofitConfig::default()
        };
        let single = retrofit(&e, &g, &base).unwrap();
        let multi = retrofit(&e, &g, &RetrofitConfig { threads: 3, ..base }).unwrap();
        assert_eq!(single.refined, multi.refined);
    }

    #[test]
    fn invalid_config_is_rejected() {
        for config in [
            RetrofitConfig { alpha: 0.0, ..RetrofitConfig::default() },
            RetrofitConfig { beta: -1.0, ..RetrofitConfig::default() },
            RetrofitConfig { nu: 0.0, ..RetrofitConfig::default() },
            RetrofitConfig { sigma: 0.0, ..RetrofitConfig::default() },
        ] {
            assert!(config.validate().is_err());
        }
    }
}
