use ctx2vec::eval::nearest_neighbors;
use ctx2vec::Embeddings;

use crate::args::NnArgs;
use crate::error::{Failure, WithContext};
use crate::manifest::FileLog;

pub fn run(args: &NnArgs, files: &mut FileLog) -> Result<(), Failure> {
    files.input(&args.embeddings);
    let emb = Embeddings::load(&args.embeddings).context_for(format!("loading {}", args.embeddings.display()))?;
    let mut out = String::new();
    for word in &args.word {
        for (neighbour, cos) in nearest_neighbors(&emb, word, args.top)? {
            out.push_str(&format!("{word}\t{neighbour}\t{cos:.6}\n"));
        }
    }
    print!("{out}");
    Ok(())
}
