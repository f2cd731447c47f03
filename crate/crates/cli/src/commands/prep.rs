use std::io::Write;

use ctx2vec::corpus::{build_vocabulary, length_filter};

use super::{create, read_lines};
use crate::args::PrepArgs;
use crate::error::{Failure, WithContext};
use crate::manifest::FileLog;

pub fn run(args: &PrepArgs, files: &mut FileLog) -> Result<(), Failure> {
    if args.min_len > args.max_len {
        return Err(Failure::usage("--min-len must not exceed --max-len"));
    }
    files.input(&args.input);
    let lines = read_lines(&args.input)?;
    let kept: Vec<String> = lines
        .iter()
        .filter(|l| {
            if args.no_length_filter {
                !l.trim().is_empty()
            } else {
                length_filter(l, args.min_len, args.max_len)
            }
        })
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .collect();
    log::info!("kept {} of {} sentences", kept.len(), lines.len());

    let vocab = build_vocabulary(kept.iter(), args.min_count, args.max_vocab).context_for("building vocabulary")?;

    let mut out = create(&args.output)?;
    for l in &kept {
        writeln!(out, "{l}").context_for(format!("writing {}", args.output.display()))?;
    }
    out.flush()?;
    files.output(&args.output);

    let mut v = create(&args.vocab)?;
    vocab.write(&mut v).context_for(format!("writing {}", args.vocab.display()))?;
    v.flush()?;
    files.output(&args.vocab);
    Ok(())
}
