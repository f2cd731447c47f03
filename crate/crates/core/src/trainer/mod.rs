//! Training the static embedding table against the joint objective
//! `η₁ L₁ + η₂ L₂ + η₃ L₃`.
//!
//! For every center position `i` of a sentence the projected teacher vector
//! `u_i = W_o o_i` plays the role of the skip-gram input vector, and the
//! static table supplies the context-word rows `u′`. After training, the
//! table is the output embedding set.
//!
//! Optimisation is plain SGD with linear learning-rate decay. Sparse table
//! rows are updated after every example; the dense parameters (`W_o`, and
//! `W₁`/`W₂` in explicit attention mode) accumulate gradients over a
//! sentence and are updated once per sentence. With `threads > 1`, workers
//! process disjoint sentence shards and update table rows without locks;
//! the dense update is the only exclusive section.

mod attention;
mod checkpoint;
mod loss;
mod table;

use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{iter_examples, keep_probability, TokenizedSentence, TrainingExample, Vocabulary};
use crate::embeddings::Embeddings;
use crate::error::{Error, Result};
use crate::linalg::{axpy, Matrix};
use crate::teacher::{ProjectionLayer, TeacherVectors};

pub use attention::{AttentionForward, AttentionLayer, Phi};
pub use checkpoint::Checkpoint;
pub use loss::{
    loss_contextualized, loss_negative, loss_semantic, negative_loss, semantic_loss, NegativeLoss,
    PairLoss, SemanticLoss,
};

use table::SharedTable;

/// Where the contextualized term gets `V_context` from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttentionMode {
    /// `V_context = u_i`, reusing the projected center vector.
    #[default]
    Tied,
    /// Separate `W₁`/`W₂` attention over the teacher vectors.
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainerConfig {
    /// Static embedding dimensionality `d_emb`.
    pub dim: usize,
    /// Skip-gram window `w_s`.
    pub window: usize,
    /// Teacher context window `w_s′`; `None` reuses `window`.
    pub attention_window: Option<usize>,
    /// Negatives per example.
    pub negatives: usize,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub learning_rate: f64,
    /// Floor of the linear decay, as a fraction of `learning_rate`.
    pub min_learning_rate_ratio: f64,
    pub epochs: usize,
    pub seed: u64,
    pub attention_mode: AttentionMode,
    pub lambda1: f64,
    pub lambda2: f64,
    pub phi: Phi,
    /// L2-normalise both operands of the semantic term.
    pub normalize_semantic: bool,
    pub noise_exponent: f64,
    /// Frequent-word subsampling threshold; off when `None`.
    pub subsample: Option<f64>,
    pub threads: usize,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            dim: 300,
            window: 5,
            attention_window: None,
            negatives: 5,
            eta1: 1.0,
            eta2: 1.0,
            eta3: 1.0,
            learning_rate: 0.025,
            min_learning_rate_ratio: 1e-4,
            epochs: 5,
            seed: 1,
            attention_mode: AttentionMode::Tied,
            lambda1: 0.5,
            lambda2: 0.5,
            phi: Phi::None,
            normalize_semantic: true,
            noise_exponent: crate::corpus::DEFAULT_NOISE_EXPONENT,
            subsample: None,
            threads: 1,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.dim == 0 {
            return bad("dim must be at least 1".into());
        }
        if self.window == 0 || self.attention_window == Some(0) {
            return bad("window sizes must be at least 1".into());
        }
        if self.negatives == 0 {
            return bad("negatives must be at least 1".into());
        }
        for (name, eta) in [("eta1", self.eta1), ("eta2", self.eta2), ("eta3", self.eta3)] {
            if !(eta >= 0.0 && eta.is_finite()) {
                return bad(format!("{name} must be a finite non-negative number, got {eta}"));
            }
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("invalid learning rate {}", self.learning_rate));
        }
        if !(0.0..=1.0).contains(&self.min_learning_rate_ratio) {
            return bad("min_learning_rate_ratio must lie in [0, 1]".into());
        }
        if !self.lambda1.is_finite() || !self.lambda2.is_finite() {
            return bad("lambda weights must be finite".into());
        }
        if !(self.noise_exponent.is_finite()) {
            return bad("noise exponent must be finite".into());
        }
        if let Some(t) = self.subsample {
            if t.is_nan() || t <= 0.0 {
                return bad("subsample threshold must be positive".into());
            }
        }
        if self.threads == 0 {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }

    pub fn effective_attention_window(&self) -> usize {
        self.attention_window.unwrap_or(self.window)
    }
}

/// The static table `u′`, one row per vocabulary id.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    table: Matrix,
}

impl EmbeddingMatrix {
    /// Uniform initialisation in `[-0.5/dim, 0.5/dim]`.
    pub fn random<R: Rng + ?Sized>(rows: usize, dim: usize, rng: &mut R) -> Self {
        let bound = 0.5 / dim as f64;
        let data = (0..rows * dim).map(|_| rng.random_range(-bound..=bound)).collect();
        EmbeddingMatrix {
            table: Matrix::from_vec(rows, dim, data).expect("shape"),
        }
    }

    pub fn from_matrix(table: Matrix) -> Self {
        EmbeddingMatrix { table }
    }

    pub fn rows(&self) -> usize {
        self.table.rows()
    }

    pub fn dim(&self) -> usize {
        self.table.cols()
    }

    pub fn row(&self, id: u32) -> &[f64] {
        self.table.row(id as usize)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.table
    }

    pub fn matrix_mut(&mut self) -> &mut Matrix {
        &mut self.table
    }

    pub fn to_embeddings(&self, vocab: &Vocabulary) -> Result<Embeddings> {
        Embeddings::new(vocab.words().to_vec(), self.table.clone())
    }
}

/// Parameters shared by every example: the projection and, in explicit
/// mode, the attention layer.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseParams {
    pub projection: ProjectionLayer,
    pub attention: Option<AttentionLayer>,
}

impl DenseParams {
    fn is_finite(&self) -> bool {
        self.projection.weights().is_finite()
            && self.attention.as_ref().is_none_or(AttentionLayer::is_finite)
    }
}

/// Complete trainable state.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelState {
    pub embeddings: EmbeddingMatrix,
    pub params: DenseParams,
}

impl ModelState {
    /// Seeded initialisation: table first, then `W_o`, then `W₁`, `W₂`.
    pub fn initialize(vocab_size: usize, teacher_dim: usize, config: &TrainerConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let embeddings = EmbeddingMatrix::random(vocab_size, config.dim, &mut rng);
        let projection = ProjectionLayer::random(config.dim, teacher_dim, &mut rng);
        let attention = match config.attention_mode {
            AttentionMode::Tied => None,
            AttentionMode::Explicit => Some(AttentionLayer::random(
                teacher_dim,
                config.dim,
                config.lambda1,
                config.lambda2,
                config.phi,
                &mut rng,
            )),
        };
        ModelState {
            embeddings,
            params: DenseParams {
                projection,
                attention,
            },
        }
    }
}

/// Inputs of one example with every row already looked up.
#[derive(Clone, Debug)]
pub struct ExampleInput<'a> {
    /// Teacher vector of the center word.
    pub o_center: &'a [f64],
    /// Teacher vectors of the attention window, center excluded.
    pub o_attention: Vec<&'a [f64]>,
    /// Table rows of the context words.
    pub context_rows: Vec<&'a [f64]>,
    /// Table rows of the sampled negatives.
    pub negative_rows: Vec<&'a [f64]>,
}

/// Per-example loss values. `joint` is the weighted sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub semantic: f64,
    pub contextualized: f64,
    pub negative: f64,
    pub joint: f64,
}

impl LossBreakdown {
    fn add(&mut self, other: &LossBreakdown) {
        self.semantic += other.semantic;
        self.contextualized += other.contextualized;
        self.negative += other.negative;
        self.joint += other.joint;
    }

    fn scaled(&self, s: f64) -> LossBreakdown {
        LossBreakdown {
            semantic: self.semantic * s,
            contextualized: self.contextualized * s,
            negative: self.negative * s,
            joint: self.joint * s,
        }
    }
}

/// Loss and gradients of the joint objective for one example. All
/// gradients already include the `η` weights.
#[derive(Clone, Debug)]
pub struct ExampleOutput {
    pub losses: LossBreakdown,
    /// Gradient for every context row (they share one).
    pub grad_context_row: Vec<f64>,
    pub grad_negative_rows: Vec<Vec<f64>>,
    /// Gradient with respect to `u_i`, including the tied `V_context` path.
    pub grad_center: Vec<f64>,
    /// Gradient with respect to `V_context` in explicit attention mode.
    pub grad_attention: Option<Vec<f64>>,
    /// Pooled context vector from the attention forward pass.
    pub pooled: Option<Vec<f64>>,
}

pub fn example_objective(
    params: &DenseParams,
    input: &ExampleInput<'_>,
    config: &TrainerConfig,
) -> Result<ExampleOutput> {
    let u = params.projection.project(input.o_center)?;
    let dim = u.len();
    let mut losses = LossBreakdown::default();
    let mut grad_center = vec![0.0; dim];
    let mut grad_context_row = vec![0.0; dim];
    let mut grad_negative_rows = Vec::new();
    let mut grad_attention = None;
    let mut pooled = None;

    if config.eta1 > 0.0 && !input.context_rows.is_empty() {
        let mut sum = vec![0.0; dim];
        for row in &input.context_rows {
            axpy(1.0, row, &mut sum);
        }
        let l1 = semantic_loss(&sum, &u, config.normalize_semantic);
        losses.semantic = l1.loss;
        axpy(config.eta1, &l1.grad_context, &mut grad_context_row);
        axpy(config.eta1, &l1.grad_center, &mut grad_center);
    }

    if config.eta2 > 0.0 {
        match (config.attention_mode, &params.attention) {
            (AttentionMode::Tied, _) => {
                let l2 = loss_contextualized(&u, &u);
                losses.contextualized = l2.loss;
                axpy(config.eta2, &l2.grad_left, &mut grad_center);
                axpy(config.eta2, &l2.grad_right, &mut grad_center);
            }
            (AttentionMode::Explicit, Some(layer)) => {
                let fwd = layer.forward(input.o_center, &input.o_attention)?;
                let l2 = loss_contextualized(&fwd.output, &u);
                losses.contextualized = l2.loss;
                axpy(config.eta2, &l2.grad_right, &mut grad_center);
                grad_attention = Some(l2.grad_left.iter().map(|g| config.eta2 * g).collect());
                pooled = Some(fwd.pooled);
            }
            (AttentionMode::Explicit, None) => {
                return Err(Error::InvalidParameter(
                    "explicit attention mode requires an attention layer".into(),
                ))
            }
        }
    }

    if config.eta3 > 0.0 && !input.negative_rows.is_empty() {
        let l3 = negative_loss(&input.negative_rows, &u);
        losses.negative = l3.loss;
        axpy(config.eta3, &l3.grad_center, &mut grad_center);
        grad_negative_rows = l3
            .grad_negatives
            .into_iter()
            .map(|g| g.into_iter().map(|x| config.eta3 * x).collect())
            .collect();
    }

    losses.joint = config.eta1 * losses.semantic
        + config.eta2 * losses.contextualized
        + config.eta3 * losses.negative;

    Ok(ExampleOutput {
        losses,
        grad_context_row,
        grad_negative_rows,
        grad_center,
        grad_attention,
        pooled,
    })
}

/// Dense-parameter gradients, shaped like [`DenseParams`].
#[derive(Clone, Debug, PartialEq)]
pub struct DenseGrads {
    pub w_o: Matrix,
    pub w1: Option<Matrix>,
    pub w2: Option<Matrix>,
}

impl DenseGrads {
    pub fn zeros_like(params: &DenseParams) -> Self {
        let w = params.projection.weights();
        let (w1, w2) = match &params.attention {
            Some(a) => (
                Some(Matrix::zeros(a.w1.rows(), a.w1.cols())),
                Some(Matrix::zeros(a.w2.rows(), a.w2.cols())),
            ),
            None => (None, None),
        };
        DenseGrads {
            w_o: Matrix::zeros(w.rows(), w.cols()),
            w1,
            w2,
        }
    }

    /// Adds the dense gradients implied by one example's output.
    pub fn accumulate(&mut self, params: &DenseParams, out: &ExampleOutput, o_center: &[f64]) {
        self.w_o.add_outer(1.0, &out.grad_center, o_center);
        if let (Some(layer), Some(g), Some(pooled), Some(w1), Some(w2)) = (
            &params.attention,
            &out.grad_attention,
            &out.pooled,
            self.w1.as_mut(),
            self.w2.as_mut(),
        ) {
            layer.accumulate_grads(o_center, pooled, g, 1.0, w1, w2);
        }
    }

    fn apply(&self, params: &mut DenseParams, alpha: f64) {
        params.projection.weights_mut().add_scaled(alpha, &self.w_o);
        if let (Some(layer), Some(w1), Some(w2)) = (params.attention.as_mut(), &self.w1, &self.w2) {
            layer.w1.add_scaled(alpha, w1);
            layer.w2.add_scaled(alpha, w2);
        }
    }

    fn clear(&mut self) {
        self.w_o.fill(0.0);
        if let Some(m) = self.w1.as_mut() {
            m.fill(0.0);
        }
        if let Some(m) = self.w2.as_mut() {
            m.fill(0.0);
        }
    }
}

/// Mean per-example losses for each training epoch.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<LossBreakdown>,
    pub examples_per_epoch: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct TrainedModel {
    pub state: ModelState,
    pub report: TrainReport,
}

impl TrainedModel {
    pub fn embeddings(&self) -> &EmbeddingMatrix {
        &self.state.embeddings
    }

    pub fn projection(&self) -> &ProjectionLayer {
        &self.state.params.projection
    }

    pub fn attention(&self) -> Option<&AttentionLayer> {
        self.state.params.attention.as_ref()
    }
}

/// Checks that teacher records line up with corpus sentences one-to-one.
pub fn check_alignment(sentences: &[TokenizedSentence], teachers: &[TeacherVectors]) -> Result<usize> {
    if sentences.len() != teachers.len() {
        return Err(Error::Misaligned {
            sentence_id: sentences.len().min(teachers.len()) as u64,
            message: format!(
                "{} corpus sentences but {} teacher records",
                sentences.len(),
                teachers.len()
            ),
        });
    }
    let dim = teachers.first().map_or(0, TeacherVectors::dim);
    for (idx, (s, t)) in sentences.iter().zip(teachers).enumerate() {
        if t.dim() != dim {
            return Err(Error::Misaligned {
                sentence_id: t.sentence_id,
                message: format!("teacher dimension {} differs from {dim}", t.dim()),
            });
        }
        if t.len() != s.source_len {
            return Err(Error::Misaligned {
                sentence_id: t.sentence_id,
                message: format!(
                    "sentence {idx} has {} tokens but {} teacher vectors",
                    s.source_len,
                    t.len()
                ),
            });
        }
    }
    Ok(dim)
}

/// Trains from a fresh seeded initialisation.
pub fn train(
    vocab: &Vocabulary,
    sentences: &[TokenizedSentence],
    teachers: &[TeacherVectors],
    config: &TrainerConfig,
) -> Result<TrainedModel> {
    config.validate()?;
    let teacher_dim = check_alignment(sentences, teachers)?;
    if teacher_dim == 0 {
        return Err(Error::EmptyCorpus);
    }
    let state = ModelState::initialize(vocab.len(), teacher_dim, config);
    train_from(state, vocab, sentences, teachers, config)
}

/// Continues training from an existing state.
pub fn train_from(
    state: ModelState,
    vocab: &Vocabulary,
    sentences: &[TokenizedSentence],
    teachers: &[TeacherVectors],
    config: &TrainerConfig,
) -> Result<TrainedModel> {
    config.validate()?;
    check_state(&state, vocab, sentences, teachers, config)?;
    let vocab = &vocab.clone().with_noise_exponent(config.noise_exponent);

    let table = SharedTable::from_matrix(state.embeddings.matrix());
    let dense = RwLock::new(state.params);
    let progress = AtomicU64::new(0);
    let work_per_epoch: u64 = sentences.iter().map(|s| s.len() as u64).sum();
    let total_work = (work_per_epoch * config.epochs as u64).max(1);
    let mut report = TrainReport::default();

    for epoch in 0..config.epochs {
        let ctx = PassContext {
            vocab,
            sentences,
            teachers,
            config,
            table: &table,
            dense: &dense,
            progress: &progress,
            total_work,
            epoch,
            update: true,
        };
        let totals = run_pass(&ctx)?;
        let mean = totals.losses.scaled(1.0 / totals.examples.max(1) as f64);
        log::debug!("epoch {epoch}: {mean:?} over {} examples", totals.examples);
        report.epochs.push(mean);
        report.examples_per_epoch.push(totals.examples);

        let dense_ok = dense.read().expect("dense parameters lock").is_finite();
        if !dense_ok || !table.to_matrix().is_finite() {
            return Err(Error::Diverged { epoch });
        }
    }

    Ok(TrainedModel {
        state: ModelState {
            embeddings: EmbeddingMatrix::from_matrix(table.to_matrix()),
            params: dense.into_inner().expect("dense parameters lock"),
        },
        report,
    })
}

/// Mean per-example losses over a corpus without updating anything.
/// Negatives are drawn from a generator seeded with `seed`.
pub fn evaluate_loss(
    state: &ModelState,
    vocab: &Vocabulary,
    sentences: &[TokenizedSentence],
    teachers: &[TeacherVectors],
    config: &TrainerConfig,
    seed: u64,
) -> Result<LossBreakdown> {
    config.validate()?;
    check_state(state, vocab, sentences, teachers, config)?;
    let vocab = &vocab.clone().with_noise_exponent(config.noise_exponent);
    let table = SharedTable::from_matrix(state.embeddings.matrix());
    let dense = RwLock::new(state.params.clone());
    let progress = AtomicU64::new(0);
    let eval_config = TrainerConfig {
        seed,
        threads: 1,
        subsample: None,
        ..config.clone()
    };
    let ctx = PassContext {
        vocab,
        sentences,
        teachers,
        config: &eval_config,
        table: &table,
        dense: &dense,
        progress: &progress,
        total_work: 1,
        epoch: 0,
        update: false,
    };
    let totals = run_pass(&ctx)?;
    Ok(totals.losses.scaled(1.0 / totals.examples.max(1) as f64))
}

fn check_state(
    state: &ModelState,
    vocab: &Vocabulary,
    sentences: &[TokenizedSentence],
    teachers: &[TeacherVectors],
    config: &TrainerConfig,
) -> Result<()> {
    let teacher_dim = check_alignment(sentences, teachers)?;
    if state.embeddings.rows() != vocab.len() {
        return Err(Error::DimensionMismatch {
            expected: vocab.len(),
            found: state.embeddings.rows(),
        });
    }
    if state.embeddings.dim() != config.dim || state.params.projection.output_dim() != config.dim {
        return Err(Error::DimensionMismatch {
            expected: config.dim,
            found: state.embeddings.dim(),
        });
    }
    if teacher_dim != 0 && state.params.projection.input_dim() != teacher_dim {
        return Err(Error::DimensionMismatch {
            expected: state.params.projection.input_dim(),
            found: teacher_dim,
        });
    }
    match (config.attention_mode, &state.params.attention) {
        (AttentionMode::Explicit, None) => Err(Error::InvalidParameter(
            "explicit attention mode requires an attention layer".into(),
        )),
        (AttentionMode::Tied, Some(_)) => Err(Error::InvalidParameter(
            "tied attention mode does not use an attention layer".into(),
        )),
        _ => Ok(()),
    }
}

struct PassContext<'a> {
    vocab: &'a Vocabulary,
    sentences: &'a [TokenizedSentence],
    teachers: &'a [TeacherVectors],
    config: &'a TrainerConfig,
    table: &'a SharedTable,
    dense: &'a RwLock<DenseParams>,
    progress: &'a AtomicU64,
    total_work: u64,
    epoch: usize,
    update: bool,
}

#[derive(Default)]
struct PassTotals {
    losses: LossBreakdown,
    examples: u64,
}

fn run_pass(ctx: &PassContext<'_>) -> Result<PassTotals> {
    let n = ctx.sentences.len();
    let threads = ctx.config.threads.min(n.max(1));
    if threads <= 1 {
        return run_shard(ctx, 0..n, 0);
    }
    let chunk = n.div_ceil(threads);
    let results: Vec<Result<PassTotals>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let range = (w * chunk).min(n)..((w + 1) * chunk).min(n);
                scope.spawn(move || run_shard(ctx, range, w as u64))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training worker panicked"))
            .collect()
    });
    let mut totals = PassTotals::default();
    for r in results {
        let r = r?;
        totals.losses.add(&r.losses);
        totals.examples += r.examples;
    }
    Ok(totals)
}

fn run_shard(ctx: &PassContext<'_>, range: Range<usize>, worker: u64) -> Result<PassTotals> {
    let config = ctx.config;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(((ctx.epoch as u64 + 1) << 16) | worker);

    let att_window = config.effective_attention_window();
    let mut totals = PassTotals::default();
    let mut grads = {
        let dense = ctx.dense.read().expect("dense parameters lock");
        DenseGrads::zeros_like(&dense)
    };
    let mut active: Vec<usize> = Vec::new();
    let mut context_ids: Vec<u32> = Vec::new();
    let mut negative_ids: Vec<u32> = Vec::new();
    let mut exclude: Vec<u32> = Vec::new();
    let mut row_bufs: Vec<Vec<f64>> = Vec::new();

    for sid in range {
        let sentence = &ctx.sentences[sid];
        let teacher = ctx.teachers[sid].to_matrix();

        active.clear();
        match config.subsample {
            Some(t) => {
                let total = ctx.vocab.total_tokens() as f64;
                for (p, &id) in sentence.token_ids.iter().enumerate() {
                    let freq = ctx.vocab.count(id) as f64 / total;
                    if rng.random::<f64>() < keep_probability(freq, t) {
                        active.push(p);
                    }
                }
            }
            None => active.extend(0..sentence.len()),
        }

        let done = ctx.progress.fetch_add(sentence.len() as u64, Ordering::Relaxed);
        let lr = config.learning_rate
            * (1.0 - done as f64 / ctx.total_work as f64).max(config.min_learning_rate_ratio);
        if active.len() < 2 {
            continue;
        }

        {
            let params = ctx.dense.read().expect("dense parameters lock");
            for ex in iter_examples(active.len(), config.window) {
                let center_tok = active[ex.center];
                let center_id = sentence.token_ids[center_tok];
                let o_center = teacher.row(sentence.source_positions[center_tok]);

                context_ids.clear();
                context_ids.extend(ex.context().map(|p| sentence.token_ids[active[p]]));
                let o_attention: Vec<&[f64]> =
                    TrainingExample::new(ex.center, active.len(), att_window)
                        .context()
                        .map(|p| teacher.row(sentence.source_positions[active[p]]))
                        .collect();

                negative_ids.clear();
                if config.eta3 > 0.0 {
                    exclude.clear();
                    exclude.push(center_id);
                    exclude.extend_from_slice(&context_ids);
                    if ctx.vocab.can_sample_excluding(&exclude) {
                        ctx.vocab
                            .sample_negative_into(&mut rng, config.negatives, &exclude, &mut negative_ids)?;
                    }
                }

                let needed = context_ids.len() + negative_ids.len();
                if row_bufs.len() < needed {
                    row_bufs.resize_with(needed, Vec::new);
                }
                for (buf, &id) in row_bufs.iter_mut().zip(context_ids.iter().chain(&negative_ids)) {
                    ctx.table.read_row(id, buf);
                }
                let (ctx_bufs, neg_bufs) = row_bufs[..needed].split_at(context_ids.len());
                let input = ExampleInput {
                    o_center,
                    o_attention,
                    context_rows: ctx_bufs.iter().map(Vec::as_slice).collect(),
                    negative_rows: neg_bufs.iter().map(Vec::as_slice).collect(),
                };
                let out = example_objective(&params, &input, config)?;
                totals.losses.add(&out.losses);
                totals.examples += 1;

                if ctx.update && lr > 0.0 {
                    if config.eta1 > 0.0 {
                        for &id in &context_ids {
                            ctx.table.add_to_row(id, -lr, &out.grad_context_row);
                        }
                    }
                    for (&id, g) in negative_ids.iter().zip(&out.grad_negative_rows) {
                        ctx.table.add_to_row(id, -lr, g);
                    }
                    grads.accumulate(&params, &out, o_center);
                }
            }
        }

        if ctx.update && lr > 0.0 {
            let mut params = ctx.dense.write().expect("dense parameters lock");
            grads.apply(&mut params, -lr);
            grads.clear();
        }
    }
    Ok(totals)
}
