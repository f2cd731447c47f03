use std::collections::HashMap;

use ctx2vec::teacher::TeacherWriter;
use ctx2vec::SyntheticTeacher;

use super::read_lines;
use crate::args::GenTeacherArgs;
use crate::error::{Failure, WithContext};
use crate::manifest::FileLog;

fn read_groups(path: &std::path::Path) -> Result<HashMap<String, String>, Failure> {
    let mut groups = HashMap::new();
    for (n, line) in read_lines(path)?.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (word, group) = line.split_once('\t').ok_or_else(|| {
            Failure::Data(anyhow::anyhow!("{}:{}: expected word<TAB>group", path.display(), n + 1))
        })?;
        groups.insert(word.trim().to_owned(), group.trim().to_owned());
    }
    Ok(groups)
}

pub fn run(args: &GenTeacherArgs, files: &mut FileLog) -> Result<(), Failure> {
    let mut teacher = SyntheticTeacher::new(args.seed, args.dim, args.mix)?;
    if let Some(path) = &args.groups {
        files.input(path);
        teacher = teacher.with_groups(read_groups(path)?);
    }
    files.input(&args.corpus);
    let lines = read_lines(&args.corpus)?;
    let mut writer = TeacherWriter::create(&args.output, args.dim, lines.len() as u64)
        .context_for(format!("creating {}", args.output.display()))?;
    for (i, line) in lines.iter().enumerate() {
        let words: Vec<&str> = line.split_whitespace().collect();
        writer
            .write(&teacher.vectors(i as u64, &words))
            .context_for(format!("writing {}", args.output.display()))?;
    }
    writer.finish()?;
    files.output(&args.output);
    log::info!("wrote {} teacher records of dimension {}", lines.len(), args.dim);
    Ok(())
}
