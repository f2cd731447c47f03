pub mod eval;
pub mod gen_teacher;
pub mod nn;
pub mod prep;
pub mod retrofit;
pub mod train;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Failure, WithContext};

pub(crate) fn read_lines(path: &Path) -> Result<Vec<String>, Failure> {
    let file = File::open(path).context_for(format!("opening {}", path.display()))?;
    BufReader::new(file)
        .lines()
        .collect::<Result<_, _>>()
        .context_for(format!("reading {}", path.display()))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(
        File::create(path).context_for(format!("creating {}", path.display()))?,
    ))
}

/// `<path>.meta.json`
pub(crate) fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub(crate) fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Data(e.into()))?;
    writeln!(w).and_then(|_| w.flush()).context_for(format!("writing {}", path.display()))
}
