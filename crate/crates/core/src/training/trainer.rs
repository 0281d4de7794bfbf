use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{adagrad_update, expand_examples, loss_and_grad, AdaGradState, HyperParams, LossStyle};
use crate::corpus::Corpus;
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::eval::evaluate;
use crate::models::{Arch, Habcnn, ModelParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean per-update loss, measured before each update.
    pub train_loss: f64,
    pub dev_acc: f64,
    pub dev_ndcg4: f64,
}

impl EpochRecord {
    pub fn to_jsonl(history: &[EpochRecord]) -> String {
        history
            .iter()
            .map(|r| serde_json::to_string(r).unwrap() + "\n")
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters after the epoch with the best dev accuracy.
    pub params: ModelParams,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
}

/// One update unit: a question with its positive and the negatives whose
/// hinge terms enter the same loss.
struct Unit {
    item: usize,
    question: usize,
    positive: usize,
    negatives: Vec<usize>,
}

fn units(corpus: &Corpus, style: LossStyle) -> Vec<Unit> {
    let mut out = Vec::new();
    for (i, item) in corpus.items.iter().enumerate() {
        for (q, qa) in item.questions.iter().enumerate() {
            let examples = expand_examples(i, q, qa);
            match style {
                LossStyle::PerNegative => out.extend(examples.iter().map(|e| Unit {
                    item: i,
                    question: q,
                    positive: e.positive,
                    negatives: vec![e.negative],
                })),
                LossStyle::Grouped => out.push(Unit {
                    item: i,
                    question: q,
                    positive: qa.correct_index,
                    negatives: examples.iter().map(|e| e.negative).collect(),
                }),
            }
        }
    }
    out
}

fn check_split(name: &str, corpus: &Corpus, arch: Arch) -> Result<()> {
    if corpus.num_questions() == 0 {
        return Err(Error::Config(format!("{name} split is empty")));
    }
    if arch == Arch::Te
        && corpus
            .items
            .iter()
            .flat_map(|i| &i.questions)
            .any(|q| q.statements.is_none())
    {
        return Err(Error::Config(format!(
            "{name} split lacks statements required by the te architecture"
        )));
    }
    Ok(())
}

/// Trains one architecture with AdaGrad, one example per update, and keeps
/// the parameters from the epoch with the best dev accuracy (earliest on ties).
pub fn train(
    train: &Corpus,
    dev: &Corpus,
    table: &EmbeddingTable,
    arch: Arch,
    hp: &HyperParams,
) -> Result<TrainOutcome> {
    hp.validate()?;
    check_split("train", train, arch)?;
    check_split("dev", dev, arch)?;

    let mut params = ModelParams::init(hp.model_config(arch, table.dim()), hp.seed);
    let mut state = AdaGradState::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut units = units(train, hp.loss_style);

    let mut history = Vec::with_capacity(hp.epochs);
    let mut best: Option<(f64, usize, ModelParams)> = None;
    for epoch in 1..=hp.epochs {
        units.shuffle(&mut rng);
        let mut total = 0.0;
        for u in &units {
            let item = &train.items[u.item];
            let step = loss_and_grad(
                item,
                u.question,
                u.positive,
                &u.negatives,
                table,
                &params,
                hp,
            )?;
            total += step.total;
            adagrad_update(&mut params, &step.grads, &mut state, hp.lr);
        }
        let report = evaluate(&Habcnn::new(&params, table), dev)?;
        let record = EpochRecord {
            epoch,
            train_loss: total / units.len() as f64,
            dev_acc: report.acc.all.unwrap_or(0.0),
            dev_ndcg4: report.ndcg4.all.unwrap_or(0.0),
        };
        log::info!(
            "epoch {epoch}: loss {:.5} dev acc {:.4} ndcg4 {:.4}",
            record.train_loss,
            record.dev_acc,
            record.dev_ndcg4
        );
        if best
            .as_ref()
            .is_none_or(|(acc, _, _)| record.dev_acc > *acc)
        {
            best = Some((record.dev_acc, epoch, params.clone()));
        }
        history.push(record);
    }
    let (_, best_epoch, params) = best.expect("at least one epoch");
    Ok(TrainOutcome {
        params,
        best_epoch,
        history,
    })
}
