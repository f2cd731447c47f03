use std::fs::File;
use std::io::BufReader;

use ctx2vec::retrofit::{c_nu, retrofit, Lexicon, Schedule};
use ctx2vec::{Embeddings, RetrofitConfig, RetrofitMode, SynonymGraph};
use serde_json::json;

use super::{meta_path, write_json};
use crate::args::{ModeArg, RetrofitArgs, ScheduleArg};
use crate::error::{Failure, WithContext};
use crate::manifest::FileLog;

pub fn config_from(args: &RetrofitArgs) -> RetrofitConfig {
    RetrofitConfig {
        alpha: args.alpha,
        beta: args.beta,
        nu: args.nu,
        sigma: args.sigma,
        iterations: args.iters,
        mode: match args.mode {
            ModeArg::Paper => RetrofitMode::PaperUpdate,
            ModeArg::Exact => RetrofitMode::ExactMinimizer,
        },
        schedule: match args.schedule {
            ScheduleArg::GaussSeidel => Schedule::GaussSeidel,
            ScheduleArg::Jacobi => Schedule::Jacobi,
        },
        dynamic_weights: args.dynamic_weights,
        tolerance: args.tolerance,
        threads: args.threads,
    }
}

pub fn run(args: &RetrofitArgs, files: &mut FileLog) -> Result<(), Failure> {
    let config = config_from(args);
    config.validate()?;

    files.input(&args.input);
    let emb = Embeddings::load(&args.input).context_for(format!("loading {}", args.input.display()))?;
    files.input(&args.lexicon);
    let lex_file = File::open(&args.lexicon).context_for(format!("opening {}", args.lexicon.display()))?;
    let lexicon = Lexicon::parse(BufReader::new(lex_file)).context_for(format!("reading {}", args.lexicon.display()))?;

    let (graph, stats) = SynonymGraph::from_lexicon(&lexicon, &emb);
    if stats.unknown_heads + stats.unknown_synonyms > 0 {
        log::warn!(
            "lexicon: skipped {} unknown head words and {} unknown synonyms",
            stats.unknown_heads,
            stats.unknown_synonyms
        );
    }
    log::info!("graph: {} nodes, {} edges", graph.nodes().len(), graph.edge_count());

    let refined = retrofit(&emb, &graph, &config)?;
    refined.refined.save(&args.output).context_for(format!("writing {}", args.output.display()))?;
    files.output(&args.output);

    let meta = meta_path(&args.output);
    write_json(
        &meta,
        &json!({
            "tool": "ctx2vec retrofit",
            "version": env!("CARGO_PKG_VERSION"),
            "retrofit": config,
            "c_nu": c_nu(config.nu)?,
            "lexicon": stats,
            "graph": { "nodes": graph.nodes().len(), "edges": graph.edge_count() },
            "report": refined.report,
        }),
    )?;
    files.output(&meta);
    Ok(())
}
