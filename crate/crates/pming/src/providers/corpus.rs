//! Local inverted index: a deterministic stand-in for a search engine.

use super::term::{tokenize, Term};
use super::{CountProvider, ProviderError};
use serde::{Deserialize, Serialize};
use std::collections::hash_map::Entry;
use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IndexMetadata {
    pub sources: Vec<String>,
    pub built_at_ms: u64,
}

/// Inverted index over a document collection: token -> sorted list of
/// internal document indices.
///
/// Occurrence of a term is the size of the intersection of its tokens'
/// posting lists; co-occurrence intersects the postings of both terms'
/// tokens. Documents with no tokens still count toward the corpus size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusIndex {
    doc_ids: Vec<String>,
    postings: HashMap<String, Vec<u32>>,
    #[serde(default)]
    metadata: IndexMetadata,
}

/// Build an index from `(doc_id, text)` pairs.
pub fn index_corpus<I, S, T>(documents: I) -> Result<CorpusIndex, ProviderError>
where
    I: IntoIterator<Item = (S, T)>,
    S: Into<String>,
    T: AsRef<str>,
{
    let mut doc_ids: Vec<String> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut postings: HashMap<String, Vec<u32>> = HashMap::new();

    for (doc_id, text) in documents {
        let doc_id = doc_id.into();
        if !seen.insert(doc_id.clone()) {
            return Err(ProviderError::DuplicateDocument(doc_id));
        }
        let index = doc_ids.len() as u32;
        doc_ids.push(doc_id);

        let mut distinct: Vec<String> = tokenize(text.as_ref());
        distinct.sort_unstable();
        distinct.dedup();
        for token in distinct {
            match postings.entry(token) {
                Entry::Occupied(mut list) => list.get_mut().push(index),
                Entry::Vacant(slot) => {
                    slot.insert(vec![index]);
                }
            }
        }
    }

    if doc_ids.is_empty() {
        return Err(ProviderError::EmptyCorpus);
    }

    Ok(CorpusIndex {
        doc_ids,
        postings,
        metadata: IndexMetadata {
            sources: Vec::new(),
            built_at_ms: now_ms(),
        },
    })
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Size of the intersection of sorted, duplicate-free lists.
fn intersect_sorted(lists: &[&[u32]]) -> u64 {
    match lists.len() {
        0 => 0,
        1 => lists[0].len() as u64,
        _ => {
            // Start from the shortest list and narrow it down.
            let mut order: Vec<&[u32]> = lists.to_vec();
            order.sort_by_key(|l| l.len());
            let mut current: Vec<u32> = order[0].to_vec();
            for list in &order[1..] {
                let mut next = Vec::with_capacity(current.len());
                let (mut i, mut j) = (0, 0);
                while i < current.len() && j < list.len() {
                    match current[i].cmp(&list[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            next.push(current[i]);
                            i += 1;
                            j += 1;
                        }
                    }
                }
                if next.is_empty() {
                    return 0;
                }
                current = next;
            }
            current.len() as u64
        }
    }
}

impl CorpusIndex {
    pub fn doc_count(&self) -> u64 {
        self.doc_ids.len() as u64
    }

    pub fn distinct_tokens(&self) -> usize {
        self.postings.len()
    }

    pub fn metadata(&self) -> &IndexMetadata {
        &self.metadata
    }

    fn set_source(&mut self, source: String) {
        self.metadata.sources = vec![source];
    }

    /// Read every `.txt` file under `dir` (recursively); the document
    /// id is the path relative to `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self, ProviderError> {
        let mut files = Vec::new();
        collect_txt_files(dir, dir, &mut files)?;
        files.sort();
        let mut docs = Vec::with_capacity(files.len());
        for rel in files {
            let text = fs::read_to_string(dir.join(&rel))?;
            docs.push((rel, text));
        }
        let mut index = index_corpus(docs)?;
        index.set_source(dir.display().to_string());
        Ok(index)
    }

    /// Read a JSON-lines file where each line is `{"id": ..., "text": ...}`.
    pub fn from_jsonl(path: &Path) -> Result<Self, ProviderError> {
        #[derive(Deserialize)]
        struct Line {
            id: String,
            text: String,
        }

        let file = fs::File::open(path)?;
        let reader = BufReader::new(file);
        let mut docs = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line = serde_json::from_str(&line).map_err(|e| ProviderError::Parse {
                source_name: path.display().to_string(),
                message: format!("line {}: {e}", lineno + 1),
            })?;
            docs.push((parsed.id, parsed.text));
        }
        let mut index = index_corpus(docs)?;
        index.set_source(path.display().to_string());
        Ok(index)
    }

    pub fn save(&self, path: &Path) -> Result<(), ProviderError> {
        let json = serde_json::to_string(self).map_err(|e| ProviderError::Parse {
            source_name: path.display().to_string(),
            message: e.to_string(),
        })?;
        fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ProviderError> {
        let data = fs::read_to_string(path)?;
        let index: CorpusIndex = serde_json::from_str(&data).map_err(|e| ProviderError::Parse {
            source_name: path.display().to_string(),
            message: e.to_string(),
        })?;
        for (token, list) in &index.postings {
            if !list.windows(2).all(|w| w[0] < w[1]) {
                return Err(ProviderError::Parse {
                    source_name: path.display().to_string(),
                    message: format!("posting list for `{token}` is not strictly sorted"),
                });
            }
        }
        Ok(index)
    }

    fn count_matching(&self, tokens: &[&str]) -> u64 {
        let mut distinct: Vec<&str> = tokens.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let mut lists: Vec<&[u32]> = Vec::with_capacity(distinct.len());
        for token in distinct {
            match self.postings.get(token) {
                Some(list) => lists.push(list.as_slice()),
                None => return 0,
            }
        }
        intersect_sorted(&lists)
    }
}

fn collect_txt_files(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<(), ProviderError> {
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() {
            collect_txt_files(root, &path, out)?;
        } else if path.extension().and_then(|e| e.to_str()) == Some("txt") {
            let rel = path
                .strip_prefix(root)
                .unwrap_or(&path)
                .to_string_lossy()
                .into_owned();
            out.push(rel);
        }
    }
    Ok(())
}

impl CountProvider for CorpusIndex {
    fn occurrence(&self, term: &Term) -> Result<u64, ProviderError> {
        let tokens: Vec<&str> = term.tokens().iter().map(String::as_str).collect();
        Ok(self.count_matching(&tokens))
    }

    fn cooccurrence(&self, x: &Term, y: &Term) -> Result<u64, ProviderError> {
        let tokens: Vec<&str> = x
            .tokens()
            .iter()
            .chain(y.tokens())
            .map(String::as_str)
            .collect();
        Ok(self.count_matching(&tokens))
    }

    fn corpus_size(&self) -> u64 {
        self.doc_count()
    }

    fn provider_id(&self) -> String {
        match self.metadata.sources.first() {
            Some(source) => format!("corpus:{source}"),
            None => format!("corpus:{} docs", self.doc_ids.len()),
        }
    }
}
