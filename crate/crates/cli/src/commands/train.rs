use std::fs::File;
use std::io::BufReader;

use ctx2vec::teacher::read_teacher_file;
use ctx2vec::trainer::{train, train_from, Checkpoint, Phi};
use ctx2vec::{AttentionMode, TrainerConfig, Vocabulary};
use serde_json::json;

use super::{meta_path, read_lines, write_json};
use crate::args::{AttentionArg, PhiArg, TrainArgs};
use crate::error::{Failure, WithContext};
use crate::manifest::FileLog;

pub fn config_from(args: &TrainArgs) -> TrainerConfig {
    TrainerConfig {
        dim: args.dim,
        window: args.window,
        attention_window: args.attention_window,
        negatives: args.negatives,
        eta1: args.eta1,
        eta2: args.eta2,
        eta3: args.eta3,
        learning_rate: args.lr,
        min_learning_rate_ratio: args.min_lr_ratio,
        epochs: args.epochs,
        seed: args.seed,
        attention_mode: match args.attention {
            AttentionArg::Tied => AttentionMode::Tied,
            AttentionArg::Explicit => AttentionMode::Explicit,
        },
        lambda1: args.lambda1,
        lambda2: args.lambda2,
        phi: match args.phi {
            PhiArg::None => Phi::None,
            PhiArg::Tanh => Phi::Tanh,
        },
        normalize_semantic: !args.no_normalize_semantic,
        noise_exponent: args.noise_exponent,
        subsample: args.subsample,
        threads: args.threads,
    }
}

pub fn run(args: &TrainArgs, files: &mut FileLog) -> Result<(), Failure> {
    let config = config_from(args);
    config.validate()?;

    files.input(&args.vocab);
    let vocab_file = File::open(&args.vocab).context_for(format!("opening {}", args.vocab.display()))?;
    let vocab = Vocabulary::read(BufReader::new(vocab_file)).context_for(format!("reading {}", args.vocab.display()))?;

    files.input(&args.corpus);
    let lines = read_lines(&args.corpus)?;
    let sentences: Vec<_> = lines.iter().map(|l| vocab.tokenize(l)).collect();

    files.input(&args.teacher);
    let lengths = sentences.iter().map(|s| s.source_len).collect();
    let teachers =
        read_teacher_file(&args.teacher, Some(lengths)).context_for(format!("reading {}", args.teacher.display()))?;

    let model = match &args.resume {
        Some(path) => {
            files.input(path);
            let ckpt = Checkpoint::load(path).context_for(format!("loading checkpoint {}", path.display()))?;
            train_from(ckpt.state, &vocab, &sentences, &teachers, &config)?
        }
        None => train(&vocab, &sentences, &teachers, &config)?,
    };
    for (epoch, l) in model.report.epochs.iter().enumerate() {
        log::info!(
            "epoch {epoch}: joint {:.6} semantic {:.6} contextualized {:.6} negative {:.6}",
            l.joint,
            l.semantic,
            l.contextualized,
            l.negative
        );
    }

    let emb = model.embeddings().to_embeddings(&vocab)?;
    emb.save(&args.output).context_for(format!("writing {}", args.output.display()))?;
    files.output(&args.output);

    let meta = meta_path(&args.output);
    write_json(
        &meta,
        &json!({
            "tool": "ctx2vec train",
            "version": env!("CARGO_PKG_VERSION"),
            "trainer": config,
            "vocab_size": vocab.len(),
            "teacher_dim": model.projection().input_dim(),
            "sentences": sentences.len(),
            "resumed_from": args.resume,
            "report": model.report,
        }),
    )?;
    files.output(&meta);

    if let Some(path) = &args.checkpoint {
        Checkpoint {
            config,
            state: model.state,
        }
        .save(path)
        .context_for(format!("writing checkpoint {}", path.display()))?;
        files.output(path);
    }
    Ok(())
}
