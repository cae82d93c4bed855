//! Skip-gram with negative sampling, trained by plain SGD.
//!
//! Parameters live in `AtomicU32` cells holding `f32` bits so that several
//! workers can update them concurrently without locks (Hogwild-style: reads
//! and writes of different workers interleave freely). With one worker the
//! run is fully deterministic for a given seed.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EmbeddingMatrix;
use crate::corpus::{normalize_lemma, Corpus, Layer};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct SgnsParams {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub negatives: usize,
    /// Frequent-word subsampling threshold; 0 disables subsampling.
    pub subsample: f64,
    pub lr_start: f32,
    pub lr_end: f32,
    pub min_count: usize,
    pub workers: usize,
    /// Size of the fixed minibatch the objective is monitored on.
    pub monitor_pairs: usize,
}

impl Default for SgnsParams {
    fn default() -> Self {
        Self {
            dim: 100,
            window: 10,
            epochs: 5,
            negatives: 5,
            subsample: 1e-3,
            lr_start: 0.025,
            lr_end: 0.0001,
            min_count: 1,
            workers: 1,
            monitor_pairs: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Negative-sampling loss on the monitor minibatch: at initialization,
    /// then after every epoch (single worker) or only at the end.
    pub epoch_losses: Vec<f64>,
    pub vocab_size: usize,
    pub tokens: usize,
}

pub fn train_sgns<T: Scalar>(corpus: &Corpus, params: &SgnsParams, seed: u64) -> Result<EmbeddingMatrix<T>> {
    train_sgns_with_report(corpus, params, seed).map(|(e, _)| e)
}

struct Vocab {
    words: Vec<String>,
    counts: Vec<usize>,
    sentences: Vec<Vec<u32>>,
    tokens: usize,
}

fn build_vocab(corpus: &Corpus, min_count: usize) -> Vocab {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for tok in corpus.sentences.iter().flat_map(|s| &s.tokens) {
        if !tok.is_punct() {
            *counts.entry(normalize_lemma(&tok.lemma)).or_insert(0) += 1;
        }
    }
    let mut entries: Vec<(String, usize)> = counts.into_iter().filter(|(_, c)| *c >= min_count.max(1)).collect();
    // frequency descending, then lexicographic: stable across runs
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let index: HashMap<&str, u32> = entries.iter().enumerate().map(|(i, (w, _))| (w.as_str(), i as u32)).collect();
    let sentences: Vec<Vec<u32>> = corpus
        .sentences
        .iter()
        .map(|s| {
            s.tokens
                .iter()
                .filter(|t| !t.is_punct())
                .filter_map(|t| index.get(normalize_lemma(&t.lemma).as_str()).copied())
                .collect::<Vec<u32>>()
        })
        .filter(|s| !s.is_empty())
        .collect();
    let tokens = sentences.iter().map(Vec::len).sum();
    Vocab {
        counts: entries.iter().map(|e| e.1).collect(),
        words: entries.into_iter().map(|e| e.0).collect(),
        sentences,
        tokens,
    }
}

struct Weights {
    input: Vec<AtomicU32>,
    output: Vec<AtomicU32>,
    dim: usize,
}

impl Weights {
    #[inline]
    fn load_row(cells: &[AtomicU32], row: usize, dim: usize, out: &mut [f32]) {
        for (o, c) in out.iter_mut().zip(&cells[row * dim..(row + 1) * dim]) {
            *o = f32::from_bits(c.load(Ordering::Relaxed));
        }
    }

    #[inline]
    fn add_row(cells: &[AtomicU32], row: usize, dim: usize, scale: f32, delta: &[f32]) {
        for (c, d) in cells[row * dim..(row + 1) * dim].iter().zip(delta) {
            let v = f32::from_bits(c.load(Ordering::Relaxed)) + scale * d;
            c.store(v.to_bits(), Ordering::Relaxed);
        }
    }
}

/// Unigram^0.75 sampler over the vocabulary.
struct NegativeTable {
    cumulative: Vec<f64>,
}

impl NegativeTable {
    fn new(counts: &[usize]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        Self { cumulative }
    }

    fn sample(&self, rng: &mut impl Rng) -> u32 {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let x = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1) as u32
    }
}

#[inline]
fn sigmoid(x: f32) -> f32 {
    if x > 20.0 {
        1.0
    } else if x < -20.0 {
        0.0
    } else {
        1.0 / (1.0 + (-x).exp())
    }
}

fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A fixed set of (context, center, negatives) triples.
struct Monitor {
    items: Vec<(u32, u32, Vec<u32>)>,
}

impl Monitor {
    fn new(vocab: &Vocab, params: &SgnsParams, table: &NegativeTable, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x006d_6f6e_6974_6f72);
        let candidates: Vec<usize> = (0..vocab.sentences.len()).filter(|&i| vocab.sentences[i].len() > 1).collect();
        let mut items = Vec::new();
        if candidates.is_empty() {
            return Self { items };
        }
        for _ in 0..params.monitor_pairs {
            let s = &vocab.sentences[candidates[rng.gen_range(0..candidates.len())]];
            let pos = rng.gen_range(0..s.len());
            let lo = pos.saturating_sub(params.window);
            let hi = (pos + params.window).min(s.len() - 1);
            let mut ctx = rng.gen_range(lo..=hi);
            if ctx == pos {
                ctx = if pos > lo { pos - 1 } else { pos + 1 };
            }
            let negs = (0..params.negatives).map(|_| table.sample(&mut rng)).collect();
            items.push((s[ctx], s[pos], negs));
        }
        Self { items }
    }

    fn loss(&self, w: &Weights) -> f64 {
        if self.items.is_empty() {
            return 0.0;
        }
        let mut a = vec![0.0f32; w.dim];
        let mut b = vec![0.0f32; w.dim];
        let mut total = 0.0f64;
        for (ctx, center, negs) in &self.items {
            Weights::load_row(&w.input, *ctx as usize, w.dim, &mut a);
            Weights::load_row(&w.output, *center as usize, w.dim, &mut b);
            total -= (sigmoid(dot(&a, &b)) as f64).max(1e-12).ln();
            for n in negs {
                Weights::load_row(&w.output, *n as usize, w.dim, &mut b);
                total -= (sigmoid(-dot(&a, &b)) as f64).max(1e-12).ln();
            }
        }
        total / self.items.len() as f64
    }
}

struct Schedule<'a> {
    params: &'a SgnsParams,
    keep_prob: Vec<f32>,
    table: NegativeTable,
    total_work: usize,
}

impl Schedule<'_> {
    fn lr(&self, done: usize) -> f32 {
        let p = self.params;
        let frac = (done as f32 / self.total_work.max(1) as f32).min(1.0);
        (p.lr_start - (p.lr_start - p.lr_end) * frac).max(p.lr_end)
    }

    /// One pass over `sentences`. `progress` counts processed tokens across
    /// all workers and drives the learning-rate decay.
    fn run(&self, w: &Weights, sentences: &[Vec<u32>], rng: &mut ChaCha8Rng, progress: &AtomicUsize) {
        let dim = w.dim;
        let p = self.params;
        let mut l1 = vec![0.0f32; dim];
        let mut l2 = vec![0.0f32; dim];
        let mut grad = vec![0.0f32; dim];
        let mut kept: Vec<u32> = Vec::new();
        for sentence in sentences {
            kept.clear();
            kept.extend(
                sentence
                    .iter()
                    .copied()
                    .filter(|&id| self.keep_prob[id as usize] >= 1.0 || rng.gen::<f32>() < self.keep_prob[id as usize]),
            );
            let lr = self.lr(progress.fetch_add(sentence.len(), Ordering::Relaxed));
            for pos in 0..kept.len() {
                let center = kept[pos] as usize;
                let span = p.window - rng.gen_range(0..p.window);
                let lo = pos.saturating_sub(span);
                let hi = (pos + span).min(kept.len().saturating_sub(1));
                for cpos in lo..=hi {
                    if cpos == pos {
                        continue;
                    }
                    let ctx = kept[cpos] as usize;
                    Weights::load_row(&w.input, ctx, dim, &mut l1);
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    for d in 0..=p.negatives {
                        let (target, label) = if d == 0 {
                            (center, 1.0)
                        } else {
                            let n = self.table.sample(rng) as usize;
                            if n == center {
                                continue;
                            }
                            (n, 0.0)
                        };
                        Weights::load_row(&w.output, target, dim, &mut l2);
                        let g = (label - sigmoid(dot(&l1, &l2))) * lr;
                        for (acc, &o) in grad.iter_mut().zip(&l2) {
                            *acc += g * o;
                        }
                        Weights::add_row(&w.output, target, dim, g, &l1);
                    }
                    Weights::add_row(&w.input, ctx, dim, 1.0, &grad);
                }
            }
        }
    }
}

/// Trains embeddings on the lemma layer and reports the monitored
/// objective per epoch.
pub fn train_sgns_with_report<T: Scalar>(
    corpus: &Corpus,
    params: &SgnsParams,
    seed: u64,
) -> Result<(EmbeddingMatrix<T>, TrainReport)> {
    corpus.require(Layer::Lemma)?;
    if params.dim == 0 || params.window == 0 {
        return Err(Error::precondition("dim and window must be positive"));
    }
    let vocab = build_vocab(corpus, params.min_count);
    if vocab.words.is_empty() || vocab.tokens == 0 {
        return Err(Error::precondition("corpus has no trainable tokens"));
    }
    let dim = params.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input: Vec<AtomicU32> = (0..vocab.words.len() * dim)
        .map(|_| AtomicU32::new(((rng.gen::<f32>() - 0.5) / dim as f32).to_bits()))
        .collect();
    let output: Vec<AtomicU32> = (0..vocab.words.len() * dim).map(|_| AtomicU32::new(0)).collect();
    let weights = Weights { input, output, dim };

    let threshold = params.subsample * vocab.tokens as f64;
    let keep_prob = vocab
        .counts
        .iter()
        .map(|&c| {
            if params.subsample <= 0.0 {
                1.0
            } else {
                let f = c as f64;
                (((f / threshold).sqrt() + 1.0) * threshold / f) as f32
            }
        })
        .collect();
    let schedule = Schedule {
        params,
        keep_prob,
        table: NegativeTable::new(&vocab.counts),
        total_work: params.epochs * vocab.tokens,
    };
    let monitor = Monitor::new(&vocab, params, &schedule.table, seed);
    let mut losses = vec![monitor.loss(&weights)];
    let progress = AtomicUsize::new(0);

    let workers = params.workers.max(1);
    if workers == 1 {
        for _ in 0..params.epochs {
            schedule.run(&weights, &vocab.sentences, &mut rng, &progress);
            losses.push(monitor.loss(&weights));
        }
    } else if params.epochs > 0 {
        let chunk = vocab.sentences.len().div_ceil(workers);
        std::thread::scope(|scope| {
            for (i, part) in vocab.sentences.chunks(chunk.max(1)).enumerate() {
                let (schedule, weights, progress) = (&schedule, &weights, &progress);
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1 + i as u64));
                scope.spawn(move || {
                    for _ in 0..params.epochs {
                        schedule.run(weights, part, &mut rng, progress);
                    }
                });
            }
        });
        losses.push(monitor.loss(&weights));
    }

    let data: Vec<T> = weights
        .input
        .iter()
        .map(|c| T::of(f32::from_bits(c.load(Ordering::Relaxed)) as f64))
        .collect();
    let report = TrainReport {
        epoch_losses: losses,
        vocab_size: vocab.words.len(),
        tokens: vocab.tokens,
    };
    Ok((EmbeddingMatrix::new(vocab.words, dim, data)?, report))
}
