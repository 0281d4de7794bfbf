use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use habcnn::corpus::{
    attach_statements, read_mctest, synthesize_corpus, synthesize_statements, write_mctest, Corpus,
};
use habcnn::eval::{export_attention, trace_to_jsonl};
use habcnn::models::{read_checkpoint, write_checkpoint, Addition, AdditionProj, Checkpoint};
use habcnn::training::{EpochRecord, LossStyle};
use habcnn::{evaluate, train, Arch, EmbeddingTable, EvalReport, Habcnn, HyperParams, Scorer};

use crate::config::{CliError, CliResult, FileConfig, Kind};
use crate::{DataArgs, EvalArgs, GenArgs, InspectArgs, TrainArgs};

pub const CHECKPOINT_FILE: &str = "checkpoint.txt";
pub const HISTORY_FILE: &str = "history.jsonl";
pub const DEV_REPORT_FILE: &str = "dev_report.json";
pub const EVAL_REPORT_FILE: &str = "eval_report.json";
pub const ATTENTION_FILE: &str = "attention.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchChoice {
    Neural(Arch),
    Addition,
    AdditionProj,
}

impl FromStr for ArchChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "addition" => Ok(ArchChoice::Addition),
            "addition-proj" => Ok(ArchChoice::AdditionProj),
            other => other.parse::<Arch>().map(ArchChoice::Neural).map_err(|_| {
                format!("unknown architecture {other:?} (qp, qap, te, addition, addition-proj)")
            }),
        }
    }
}

impl fmt::Display for ArchChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArchChoice::Neural(a) => write!(f, "{a}"),
            ArchChoice::Addition => f.write_str("addition"),
            ArchChoice::AdditionProj => f.write_str("addition-proj"),
        }
    }
}

fn parse_arch(cfg: &FileConfig, flag: Option<String>) -> CliResult<Option<ArchChoice>> {
    cfg.get::<String>("arch", flag)?
        .map(|s| s.parse().map_err(|e: String| CliError::config("arch", e)))
        .transpose()
}

struct DataPaths {
    stories: PathBuf,
    answers: PathBuf,
    statements: Option<PathBuf>,
}

fn data_paths(
    cfg: &FileConfig,
    prefix: &str,
    stories: Option<PathBuf>,
    answers: Option<PathBuf>,
    statements: Option<PathBuf>,
) -> CliResult<DataPaths> {
    Ok(DataPaths {
        stories: cfg.input(&format!("{prefix}stories"), stories)?,
        answers: cfg.input(&format!("{prefix}answers"), answers)?,
        statements: cfg.optional_input(&format!("{prefix}statements"), statements)?,
    })
}

fn load_corpus(paths: &DataPaths, prefix: &str, needs_statements: bool) -> CliResult<Corpus> {
    let stories_flag = format!("{prefix}stories");
    let mut corpus = read_mctest(&paths.stories, &paths.answers)
        .map_err(|e| CliError::from_lib(Some(&stories_flag), e))?;
    match &paths.statements {
        Some(p) => {
            let flag = format!("{prefix}statements");
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::new(Kind::Data, Some(&flag), e.to_string()))?;
            attach_statements(&mut corpus, &text)
                .map_err(|e| CliError::from_lib(Some(&flag), e))?;
        }
        None if needs_statements => {
            log::warn!("no --{prefix}statements given; using fallback statements built from question and answer");
            synthesize_statements(&mut corpus);
        }
        None => {}
    }
    Ok(corpus)
}

fn load_embeddings(cfg: &FileConfig, flag: Option<PathBuf>) -> CliResult<EmbeddingTable> {
    let path = cfg.input("glove", flag)?;
    let table = EmbeddingTable::load(&path).map_err(|e| CliError::from_lib(Some("glove"), e))?;
    log::info!(
        "loaded {} embeddings of dimension {}",
        table.len(),
        table.dim()
    );
    Ok(table)
}

fn load_checkpoint(path: &Path) -> CliResult<Checkpoint> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::new(
            Kind::Data,
            Some("checkpoint"),
            format!("cannot read checkpoint {}: {e}", path.display()),
        )
    })?;
    read_checkpoint(&text).map_err(|e| CliError::from_lib(Some("checkpoint"), e))
}

fn out_dir(cfg: &FileConfig, flag: Option<PathBuf>) -> CliResult<PathBuf> {
    let dir: PathBuf = cfg.require("out", flag)?;
    std::fs::create_dir_all(&dir).map_err(|e| {
        CliError::new(
            Kind::Runtime,
            Some("out"),
            format!("cannot create {}: {e}", dir.display()),
        )
    })?;
    Ok(dir)
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| {
        CliError::new(
            Kind::Runtime,
            Some("out"),
            format!("cannot write {}: {e}", path.display()),
        )
    })
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> CliResult<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::new(
            Kind::Runtime,
            None,
            format!("cannot write to stdout: {e}"),
        )),
        _ => Ok(()),
    }
}

fn check_dim(table: &EmbeddingTable, expected: usize) -> CliResult<()> {
    if table.dim() != expected {
        return Err(CliError::config(
            "glove",
            format!(
                "embedding dimension {} does not match checkpoint dimension {expected}",
                table.dim()
            ),
        ));
    }
    Ok(())
}

fn hyper_params(cfg: &FileConfig, a: &TrainArgs) -> CliResult<HyperParams> {
    let d = HyperParams::default();
    let loss_style = match cfg
        .get::<String>("loss-style", a.loss_style.clone())?
        .as_deref()
    {
        None | Some("per-negative") => LossStyle::PerNegative,
        Some("grouped") => LossStyle::Grouped,
        Some(other) => {
            return Err(CliError::config(
                "loss-style",
                format!("unknown loss style {other:?} (per-negative, grouped)"),
            ))
        }
    };
    let hp = HyperParams {
        k_sentence: cfg.or("k1", a.k1, d.k_sentence)?,
        k_snippet: cfg.or("k2", a.k2, d.k_snippet)?,
        lr: cfg.or("lr", a.lr, d.lr)?,
        hidden: cfg.or("hidden", a.hidden, d.hidden)?,
        l2: cfg.or("l2", a.l2, d.l2)?,
        margin: cfg.or("margin", a.margin, d.margin)?,
        lambda: cfg.or("lambda", a.lambda, d.lambda)?,
        epochs: cfg.or("epochs", a.epochs, d.epochs)?,
        seed: cfg.or("seed", a.seed, d.seed)?,
        loss_style,
        ..d
    };
    hp.validate().map_err(|e| CliError::from_lib(None, e))?;
    Ok(hp)
}

fn train_data(cfg: &FileConfig, data: &DataArgs) -> CliResult<DataPaths> {
    data_paths(
        cfg,
        "",
        data.stories.clone(),
        data.answers.clone(),
        data.statements.clone(),
    )
}

pub fn cmd_train(cfg: &FileConfig, a: TrainArgs) -> CliResult<()> {
    let arch = match parse_arch(cfg, a.arch.clone())?.unwrap_or(ArchChoice::Neural(Arch::Te)) {
        ArchChoice::Neural(arch) => arch,
        other => {
            return Err(CliError::config(
                "arch",
                format!("{other} has no trainable parameters; use eval"),
            ))
        }
    };
    let hp = hyper_params(cfg, &a)?;
    let train_paths = train_data(cfg, &a.data)?;
    let dev_paths = data_paths(
        cfg,
        "dev-",
        a.dev_stories.clone(),
        a.dev_answers.clone(),
        a.dev_statements.clone(),
    )?;
    let table = load_embeddings(cfg, a.data.glove.clone())?;
    let out = out_dir(cfg, a.out.clone())?;
    let train_split = load_corpus(&train_paths, "", arch == Arch::Te)?;
    let dev_split = load_corpus(&dev_paths, "dev-", arch == Arch::Te)?;
    log::info!(
        "training {arch} on {} questions, dev {} questions",
        train_split.num_questions(),
        dev_split.num_questions()
    );

    let outcome = train(&train_split, &dev_split, &table, arch, &hp)
        .map_err(|e| CliError::from_lib(None, e))?;

    let mut meta: BTreeMap<String, String> = hp.metadata().into_iter().collect();
    meta.insert("best_epoch".into(), outcome.best_epoch.to_string());
    meta.insert(
        "statements".into(),
        train_split.statement_source.as_str().into(),
    );
    write_file(
        &out.join(CHECKPOINT_FILE),
        &write_checkpoint(&outcome.params, &meta),
    )?;
    write_file(
        &out.join(HISTORY_FILE),
        &EpochRecord::to_jsonl(&outcome.history),
    )?;

    let mut report = evaluate(&Habcnn::new(&outcome.params, &table), &dev_split)
        .map_err(|e| CliError::from_lib(None, e))?;
    report.metadata.insert("arch".into(), arch.to_string());
    report
        .metadata
        .insert("best_epoch".into(), outcome.best_epoch.to_string());
    write_file(&out.join(DEV_REPORT_FILE), &report.to_json())?;
    emit(&format!(
        "best epoch {} of {}\n{}",
        outcome.best_epoch,
        hp.epochs,
        report.to_table()
    ))?;
    Ok(())
}

pub fn cmd_eval(cfg: &FileConfig, a: EvalArgs) -> CliResult<()> {
    let requested = parse_arch(cfg, a.arch.clone())?;
    let checkpoint_path: Option<PathBuf> = cfg.get("checkpoint", a.checkpoint.clone())?;
    let checkpoint = match (requested, &checkpoint_path) {
        (Some(ArchChoice::Addition | ArchChoice::AdditionProj), _) => None,
        (_, Some(p)) => Some(load_checkpoint(p)?),
        (_, None) => {
            return Err(CliError::config(
                "checkpoint",
                "--checkpoint is required for qp, qap and te",
            ))
        }
    };
    let arch = match (requested, &checkpoint) {
        (Some(ArchChoice::Neural(want)), Some(c)) if want != c.params.arch() => {
            return Err(CliError::config(
                "arch",
                format!(
                    "checkpoint holds a {} model but --arch is {want}",
                    c.params.arch()
                ),
            ))
        }
        (Some(choice), _) => choice,
        (None, Some(c)) => ArchChoice::Neural(c.params.arch()),
        (None, None) => unreachable!("checkpoint is required without --arch"),
    };

    let paths = train_data(cfg, &a.data)?;
    let table = load_embeddings(cfg, a.data.glove.clone())?;
    let corpus = load_corpus(&paths, "", arch == ArchChoice::Neural(Arch::Te))?;

    let scorer: Box<dyn Scorer + '_> = match (arch, &checkpoint) {
        (ArchChoice::Addition, _) => Box::new(Addition { table: &table }),
        (ArchChoice::AdditionProj, _) => Box::new(AdditionProj { table: &table }),
        (ArchChoice::Neural(_), Some(c)) => {
            check_dim(&table, c.params.config.embed_dim)?;
            Box::new(Habcnn::new(&c.params, &table))
        }
        (ArchChoice::Neural(_), None) => unreachable!(),
    };
    let mut report: EvalReport =
        evaluate(scorer.as_ref(), &corpus).map_err(|e| CliError::from_lib(None, e))?;
    report.metadata.insert("arch".into(), arch.to_string());
    emit(&report.to_table())?;
    if let Some(dir) = cfg.get::<PathBuf>("out", a.out.clone())? {
        let dir = out_dir(cfg, Some(dir))?;
        write_file(&dir.join(EVAL_REPORT_FILE), &report.to_json())?;
    }
    Ok(())
}

pub fn cmd_inspect(cfg: &FileConfig, a: InspectArgs) -> CliResult<()> {
    let checkpoint = load_checkpoint(&cfg.input("checkpoint", a.checkpoint.clone())?)?;
    let item_id: String = cfg.require("item", a.item.clone())?;
    let question: usize = cfg.or("question", a.question, 0)?;
    let paths = train_data(cfg, &a.data)?;
    let table = load_embeddings(cfg, a.data.glove.clone())?;
    check_dim(&table, checkpoint.params.config.embed_dim)?;
    let corpus = load_corpus(&paths, "", checkpoint.params.arch() == Arch::Te)?;

    let item = corpus
        .find(&item_id)
        .ok_or_else(|| CliError::config("item", format!("no item with id {item_id:?}")))?;
    let qa = item.questions.get(question).ok_or_else(|| {
        CliError::config(
            "question",
            format!("item {item_id} has {} questions", item.questions.len()),
        )
    })?;
    let model = Habcnn::new(&checkpoint.params, &table);
    let scores = model
        .score_candidates(&item.story, qa)
        .map_err(|e| CliError::from_lib(None, e))?;

    emit(&format!("question: {}\n", qa.question.join(" ")))?;
    let mut all = String::new();
    for (c, candidate) in qa.candidates.iter().enumerate() {
        let records =
            export_attention(&model, item, question, c).map_err(|e| CliError::from_lib(None, e))?;
        let mark = if c == qa.correct_index { " (gold)" } else { "" };
        emit(&format!(
            "== candidate {c}{mark}: {} score {:.4}\n",
            candidate.join(" "),
            scores[c]
        ))?;
        let lines = trace_to_jsonl(&records);
        emit(&lines)?;
        all.push_str(&lines);
    }
    if let Some(dir) = cfg.get::<PathBuf>("out", a.out.clone())? {
        let dir = out_dir(cfg, Some(dir))?;
        write_file(&dir.join(ATTENTION_FILE), &all)?;
    }
    Ok(())
}

fn write_split(dir: &Path, name: &str, corpus: &Corpus) -> CliResult<()> {
    let files = write_mctest(corpus);
    write_file(&dir.join(format!("{name}.tsv")), &files.stories)?;
    write_file(&dir.join(format!("{name}.ans")), &files.answers)?;
    write_file(
        &dir.join(format!("{name}.statements.tsv")),
        &files.statements,
    )?;
    write_file(&dir.join(format!("{name}.jsonl")), &corpus.to_jsonl())
}

pub fn cmd_gen_synthetic(cfg: &FileConfig, a: GenArgs) -> CliResult<()> {
    let seed: u64 = cfg.or("seed", a.seed, 1)?;
    let n: usize = cfg.or("n", a.n, 20)?;
    let dev: usize = cfg.or("dev", a.dev, 0)?;
    let vocab: usize = cfg.or("vocab", a.vocab, 60)?;
    let dim: usize = cfg.or("dim", a.dim, 50)?;
    if n == 0 {
        return Err(CliError::config("n", "--n must be at least 1"));
    }
    if vocab < 20 {
        return Err(CliError::config("vocab", "--vocab must be at least 20"));
    }
    if dim == 0 {
        return Err(CliError::config("dim", "--dim must be at least 1"));
    }
    let out = out_dir(cfg, a.out.clone())?;

    let synth = synthesize_corpus(seed, n + dev, vocab);
    let (train_split, dev_split) = synth.corpus.split_at(n);
    write_split(&out, "train", &train_split)?;
    if dev > 0 {
        write_split(&out, "dev", &dev_split)?;
    }
    write_file(
        &out.join("embeddings.txt"),
        &synth.embedding_file(dim, seed),
    )?;
    emit(&format!(
        "wrote {n} train and {dev} dev items, {} words of dimension {dim}, to {}\n",
        synth.vocabulary.len(),
        out.display()
    ))
}
