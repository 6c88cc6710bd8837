//! Corpus directory layout shared by the commands.

use std::path::{Path, PathBuf};

use pathrex::config::RunConfig;
use pathrex::corpus::io::{read_instances, read_paths, read_relations, read_triple_names, resolve_triples, write_lines};
use pathrex::corpus::{PathIndex, SentenceInstance, Symbols, Triple, Vocabulary};
use pathrex::eval::write_text;
use pathrex::{Error, Result};

pub const RELATIONS: &str = "relations.txt";
pub const KB: &str = "kb.tsv";
pub const CONFIG: &str = "config.txt";
pub const CHECKPOINT: &str = "model.ckpt";
pub const VOCAB: &str = "vocab.json";
pub const SPLITS: [&str; 3] = ["train", "valid", "test"];

pub fn split_file(dir: &Path, split: &str) -> PathBuf {
    dir.join(format!("{split}.jsonl"))
}

pub fn paths_file(dir: &Path, split: &str) -> PathBuf {
    dir.join(format!("paths.{split}.jsonl"))
}

/// Labeled splits of one corpus with their shared symbol tables.
pub struct Corpus {
    pub dir: PathBuf,
    pub symbols: Symbols,
    pub train: Vec<SentenceInstance>,
    pub valid: Vec<SentenceInstance>,
    pub test: Vec<SentenceInstance>,
}

impl Corpus {
    pub fn load(dir: &Path) -> Result<Self> {
        let mut symbols = Symbols::new(read_relations(&dir.join(RELATIONS))?);
        let mut read = |s: &str| read_instances(&split_file(dir, s), &mut symbols);
        let train = read("train")?;
        let valid = read("valid")?;
        let test = read("test")?;
        Ok(Corpus {
            dir: dir.to_path_buf(),
            symbols,
            train,
            valid,
            test,
        })
    }

    pub fn kb(&mut self) -> Result<Vec<Triple>> {
        resolve_triples(&read_triple_names(&self.dir.join(KB))?, &mut self.symbols)
    }

    pub fn read_sentences(&mut self, path: &Path) -> Result<Vec<SentenceInstance>> {
        read_instances(path, &mut self.symbols)
    }

    pub fn paths(&mut self, dir: &Path, split: &str) -> Result<PathIndex> {
        read_paths(&paths_file(dir, split), &mut self.symbols)
    }
}

pub fn out_dir(out: Option<&PathBuf>) -> Result<PathBuf> {
    let dir = out
        .cloned()
        .ok_or_else(|| Error::Config(vec!["--out is required for this command".into()]))?;
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

pub fn write_config(dir: &Path, cfg: &RunConfig) -> Result<()> {
    write_text(&dir.join(CONFIG), &cfg.dump())
}

pub fn save_vocab(dir: &Path, vocab: &Vocabulary) -> Result<()> {
    let json = serde_json::to_string(vocab.tokens()).map_err(|e| Error::Internal(e.to_string()))?;
    write_text(&dir.join(VOCAB), &json)
}

pub fn load_vocab(dir: &Path) -> Result<Vocabulary> {
    let path = dir.join(VOCAB);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let tokens: Vec<String> = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    Ok(Vocabulary::from_tokens(tokens))
}

/// `name,value` rows under a header.
pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut lines = vec![header.to_string()];
    lines.extend(rows.iter().cloned());
    write_lines(path, &lines)
}
