use std::io::Write;
use std::path::Path;

use ctx2vec::eval::{
    analogy, categorize_purity, render_table, spearman, AnalogyDataset, AnalogyMethod, CategorizationDataset,
    EvalRecord, ParseOptions, SimilarityDataset,
};
use ctx2vec::Embeddings;

use super::create;
use crate::args::{AnalogyArg, EvalArgs};
use crate::error::{Failure, WithContext};
use crate::manifest::FileLog;

fn name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn run(args: &EvalArgs, files: &mut FileLog) -> Result<(), Failure> {
    if args.similarity.is_empty() && args.analogy.is_empty() && args.categorization.is_empty() {
        return Err(Failure::usage(
            "give at least one of --similarity, --analogy or --categorization",
        ));
    }
    let opts = ParseOptions {
        lowercase: !args.no_lowercase,
    };
    let method = match args.analogy_method {
        AnalogyArg::CosAdd => AnalogyMethod::Add,
        AnalogyArg::CosMul => AnalogyMethod::Mul,
    };

    // Everything is loaded before anything is written, so a bad input
    // leaves no partial results file behind.
    files.input(&args.embeddings);
    let emb = Embeddings::load(&args.embeddings).context_for(format!("loading {}", args.embeddings.display()))?;
    let mut sims = Vec::new();
    for p in &args.similarity {
        files.input(p);
        sims.push((name(p), SimilarityDataset::load(p, opts).context_for(format!("reading {}", p.display()))?));
    }
    let mut analogies = Vec::new();
    for p in &args.analogy {
        files.input(p);
        analogies.push((name(p), AnalogyDataset::load(p, opts).context_for(format!("reading {}", p.display()))?));
    }
    let mut cats = Vec::new();
    for p in &args.categorization {
        files.input(p);
        cats.push((name(p), CategorizationDataset::load(p, opts).context_for(format!("reading {}", p.display()))?));
    }

    let mut records = Vec::new();
    for (n, ds) in &sims {
        let r = spearman(&emb, ds).context_for(format!("scoring {n}"))?;
        records.push(EvalRecord::similarity(n, &r));
    }
    for (n, ds) in &analogies {
        records.push(EvalRecord::analogy(n, method, &analogy(&emb, ds, method)));
    }
    for (n, ds) in &cats {
        let r = categorize_purity(&emb, ds, args.seed, args.restarts).context_for(format!("scoring {n}"))?;
        records.push(EvalRecord::categorization(n, args.seed, args.restarts, &r));
    }

    let mut out = create(&args.output)?;
    for r in &records {
        writeln!(out, "{}", r.to_json_line()).context_for(format!("writing {}", args.output.display()))?;
    }
    out.flush()?;
    files.output(&args.output);
    print!("{}", render_table(&records));
    Ok(())
}
