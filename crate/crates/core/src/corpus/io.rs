//! On-disk formats: TSV triples, JSON Lines sentences and paths, and a
//! one-name-per-line relation inventory.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::paths::PathIndex;
use super::types::{
    EntityMention, PathRecord, RelationId, RelationInventory, SentenceInstance, Symbols,
    TaggedSentence, Triple,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub id: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub tokens: Vec<String>,
    pub head: MentionRecord,
    pub tail: MentionRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathLine {
    pub h: String,
    pub e: String,
    pub t: String,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn lines(path: &Path) -> Result<impl Iterator<Item = Result<(usize, String)>> + '_> {
    let reader = open(path)?;
    Ok(reader.lines().enumerate().filter_map(move |(i, l)| match l {
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(Ok((i + 1, l))),
        Err(e) => Some(Err(Error::io(path, e))),
    }))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Raw `head<TAB>relation<TAB>tail` lines, names unresolved.
pub fn read_triple_names(path: &Path) -> Result<Vec<(String, String, String)>> {
    let mut out = Vec::new();
    for item in lines(path)? {
        let (n, line) = item?;
        let fields: Vec<&str> = line.split('\t').collect();
        match fields.as_slice() {
            [h, r, t] => out.push((h.to_string(), r.trim_end().to_string(), t.trim_end().to_string())),
            _ => return Err(parse_err(path, n, format!("expected 3 tab-separated fields, got {}", fields.len()))),
        }
    }
    Ok(out)
}

/// Resolves triple names against `symbols`, interning new entities.
/// Triples with `head == tail` or an unknown relation are rejected.
pub fn resolve_triples(names: &[(String, String, String)], symbols: &mut Symbols) -> Result<Vec<Triple>> {
    names
        .iter()
        .map(|(h, r, t)| {
            if h == t {
                return Err(Error::Argument(format!("triple ({h}, {r}, {t}) has head == tail")));
            }
            let relation = symbols.relations.require(r)?;
            Ok(Triple::new(
                symbols.entities.intern(h),
                relation,
                symbols.entities.intern(t),
            ))
        })
        .collect()
}

pub fn write_triples(path: &Path, triples: &[Triple], symbols: &Symbols) -> Result<()> {
    let mut w = create(path)?;
    for t in triples {
        writeln!(
            w,
            "{}\t{}\t{}",
            symbols.entities.name(t.head),
            symbols.relations.name(t.relation),
            symbols.entities.name(t.tail)
        )
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_sentence_records(path: &Path) -> Result<Vec<(usize, SentenceRecord)>> {
    let mut out = Vec::new();
    for item in lines(path)? {
        let (n, line) = item?;
        let rec: SentenceRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(path, n, e.to_string()))?;
        out.push((n, rec));
    }
    Ok(out)
}

fn mention(m: &MentionRecord, symbols: &mut Symbols) -> EntityMention {
    EntityMention::new(symbols.entities.intern(&m.id), m.start, m.end)
}

/// Unlabeled input sentences for alignment; any `label` field is ignored.
pub fn read_tagged_sentences(path: &Path, symbols: &mut Symbols) -> Result<Vec<TaggedSentence>> {
    Ok(read_sentence_records(path)?
        .into_iter()
        .map(|(_, r)| TaggedSentence {
            head: mention(&r.head, symbols),
            tail: mention(&r.tail, symbols),
            tokens: r.tokens,
        })
        .collect())
}

/// Labeled sentences; the label must name a relation of the inventory and
/// spans must be valid.
pub fn read_instances(path: &Path, symbols: &mut Symbols) -> Result<Vec<SentenceInstance>> {
    let mut out = Vec::new();
    for (n, r) in read_sentence_records(path)? {
        let label = match &r.label {
            Some(l) => symbols
                .relations
                .get(l)
                .ok_or_else(|| parse_err(path, n, format!("unknown relation `{l}`")))?,
            None => return Err(parse_err(path, n, "missing `label`")),
        };
        let head = mention(&r.head, symbols);
        let tail = mention(&r.tail, symbols);
        let len = r.tokens.len();
        if !head.is_valid_in(len) || !tail.is_valid_in(len) || head.overlaps(&tail) {
            return Err(parse_err(path, n, "mention span out of range or overlapping"));
        }
        out.push(SentenceInstance {
            tokens: r.tokens,
            head,
            tail,
            label,
        });
    }
    Ok(out)
}

pub fn instance_record(s: &SentenceInstance, symbols: &Symbols) -> SentenceRecord {
    let m = |x: &EntityMention| MentionRecord {
        id: symbols.entities.name(x.entity).to_string(),
        start: x.start,
        end: x.end,
    };
    SentenceRecord {
        tokens: s.tokens.clone(),
        head: m(&s.head),
        tail: m(&s.tail),
        label: Some(symbols.relations.name(s.label).to_string()),
    }
}

pub fn write_instances(path: &Path, instances: &[SentenceInstance], symbols: &Symbols) -> Result<()> {
    let mut w = create(path)?;
    for s in instances {
        let line = serde_json::to_string(&instance_record(s, symbols))
            .map_err(|e| Error::Internal(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_paths(path: &Path, index: &PathIndex, symbols: &Symbols) -> Result<()> {
    let mut w = create(path)?;
    for p in index.records() {
        let rec = PathLine {
            h: symbols.entities.name(p.head).to_string(),
            e: symbols.entities.name(p.mid).to_string(),
            t: symbols.entities.name(p.tail).to_string(),
        };
        let line = serde_json::to_string(&rec).map_err(|e| Error::Internal(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_paths(path: &Path, symbols: &mut Symbols) -> Result<PathIndex> {
    let mut records = Vec::new();
    for item in lines(path)? {
        let (n, line) = item?;
        let rec: PathLine = serde_json::from_str(&line).map_err(|e| parse_err(path, n, e.to_string()))?;
        records.push(PathRecord {
            head: symbols.entities.intern(&rec.h),
            mid: symbols.entities.intern(&rec.e),
            tail: symbols.entities.intern(&rec.t),
        });
    }
    Ok(PathIndex::from_records(records))
}

pub fn write_relations(path: &Path, relations: &RelationInventory) -> Result<()> {
    let mut w = create(path)?;
    for n in relations.names() {
        writeln!(w, "{n}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_relations(path: &Path) -> Result<RelationInventory> {
    let names: Vec<String> = lines(path)?
        .map(|l| l.map(|(_, s)| s.trim().to_string()))
        .collect::<Result<_>>()?;
    if names.first().map(String::as_str) != Some(super::types::NA_NAME) {
        return Err(parse_err(path, 1, "relation list must start with NA"));
    }
    Ok(RelationInventory::new(names.into_iter().skip(1)))
}

pub fn write_lines<S: AsRef<str>>(path: &Path, items: &[S]) -> Result<()> {
    let mut w = create(path)?;
    for s in items {
        writeln!(w, "{}", s.as_ref()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Lines verbatim, including empty ones, without trailing newline characters.
pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    open(path)?
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))
}

pub fn relation_name(symbols: &Symbols, r: RelationId) -> &str {
    symbols.relations.name(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::paths::extract_paths;
    use crate::corpus::types::BagSet;

    #[test]
    fn sentence_jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.jsonl");
        std::fs::write(
            &p,
            r#"{"tokens":["Obama","was","born","in","Hawaii"],"head":{"id":"m.obama","start":0,"end":1},"tail":{"id":"m.hawaii","start":4,"end":5},"label":"born_in"}
"#,
        )
        .unwrap();
        let mut sym = Symbols::new(RelationInventory::new(["born_in"]));
        let inst = read_instances(&p, &mut sym).unwrap();
        assert_eq!(inst.len(), 1);
        assert_eq!(sym.relations.name(inst[0].label), "born_in");
        let q = dir.path().join("out.jsonl");
        write_instances(&q, &inst, &sym).unwrap();
        assert_eq!(
            std::fs::read_to_string(&p).unwrap(),
            std::fs::read_to_string(&q).unwrap()
        );
    }

    #[test]
    fn bad_lines_are_reported_with_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.jsonl");
        std::fs::write(&p, "{\"tokens\":[]}\n").unwrap();
        let mut sym = Symbols::new(RelationInventory::new(["r"]));
        let err = read_instances(&p, &mut sym).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));

        let t = dir.path().join("kb.tsv");
        std::fs::write(&t, "a\tr\tb\nbad line\n").unwrap();
        let err = read_triple_names(&t).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let missing = read_triple_names(&dir.path().join("nope.tsv")).unwrap_err();
        assert!(missing.to_string().contains("nope.tsv"));
    }

    #[test]
    fn paths_round_trip() {
        let mut sym = Symbols::new(RelationInventory::new(["r"]));
        let e: Vec<_> = ["a", "m", "b"].iter().map(|n| sym.entities.intern(n)).collect();
        let inst = |h, t| SentenceInstance {
            tokens: vec!["x".into(), "y".into()],
            head: EntityMention::new(h, 0, 1),
            tail: EntityMention::new(t, 1, 2),
            label: RelationId(1),
        };
        let bags = BagSet::from_sentences(&[inst(e[0], e[1]), inst(e[1], e[2])]);
        let idx = extract_paths(&bags, &[crate::corpus::PairKey::new(e[0], e[2])], 8);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("paths.jsonl");
        write_paths(&p, &idx, &sym).unwrap();
        assert_eq!(
            std::fs::read_to_string(&p).unwrap(),
            "{\"h\":\"a\",\"e\":\"m\",\"t\":\"b\"}\n"
        );
        assert_eq!(read_paths(&p, &mut sym).unwrap(), idx);
    }
}
