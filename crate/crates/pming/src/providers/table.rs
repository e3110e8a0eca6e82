//! Static count tables: a fixture back-end answering exactly the
//! counts stored in a JSON file.

use super::term::{Term, TermError};
use super::{CountProvider, ProviderError};
use serde::Deserialize;
use std::collections::HashMap;
use std::fs;
use std::path::Path;

#[derive(Deserialize)]
struct TableFile {
    #[serde(rename = "M")]
    m: u64,
    occurrence: HashMap<String, u64>,
    #[serde(default)]
    cooccurrence: Vec<CoocEntry>,
}

#[derive(Deserialize)]
struct CoocEntry {
    a: String,
    b: String,
    count: u64,
}

/// Provider backed by stored counts. Missing terms and missing pairs
/// answer zero; a term paired with itself answers its own occurrence,
/// matching the `x AND x = x` query identity.
#[derive(Debug, Clone)]
pub struct TableProvider {
    m: u64,
    occurrence: HashMap<String, u64>,
    cooccurrence: HashMap<(String, String), u64>,
    source: String,
}

/// Load a count table from a JSON file of the shape
/// `{"M": n, "occurrence": {term: n}, "cooccurrence": [{"a", "b", "count"}]}`.
/// Terms in the file are stored verbatim and normalized here.
pub fn load_count_table(path: &Path) -> Result<TableProvider, ProviderError> {
    let source = path.display().to_string();
    let data = fs::read_to_string(path)?;
    let file: TableFile = serde_json::from_str(&data).map_err(|e| ProviderError::Parse {
        source_name: source.clone(),
        message: format!("line {}, column {}: {e}", e.line(), e.column()),
    })?;
    TableProvider::from_file(file, source)
}

impl TableProvider {
    /// Build a table directly from counts; same validation as the file
    /// loader. Handy for tests and generated fixtures.
    pub fn from_parts<'a, O, C>(
        m: u64,
        occurrence: O,
        cooccurrence: C,
    ) -> Result<Self, ProviderError>
    where
        O: IntoIterator<Item = (&'a str, u64)>,
        C: IntoIterator<Item = (&'a str, &'a str, u64)>,
    {
        let file = TableFile {
            m,
            occurrence: occurrence
                .into_iter()
                .map(|(t, n)| (t.to_string(), n))
                .collect(),
            cooccurrence: cooccurrence
                .into_iter()
                .map(|(a, b, count)| CoocEntry {
                    a: a.to_string(),
                    b: b.to_string(),
                    count,
                })
                .collect(),
        };
        Self::from_file(file, "inline".to_string())
    }

    fn from_file(file: TableFile, source: String) -> Result<Self, ProviderError> {
        if file.m == 0 {
            return Err(ProviderError::InvalidTable(
                "corpus size M must be at least 1".to_string(),
            ));
        }

        let normalize = |raw: &str| -> Result<String, ProviderError> {
            Term::parse(raw)
                .map(|t| t.normalized())
                .map_err(|TermError::Empty(t)| ProviderError::Parse {
                    source_name: source.clone(),
                    message: format!("term `{t}` contains no word tokens"),
                })
        };

        let mut occurrence = HashMap::with_capacity(file.occurrence.len());
        for (raw, count) in &file.occurrence {
            let term = normalize(raw)?;
            if count > &file.m {
                return Err(ProviderError::InvalidTable(format!(
                    "occurrence of `{term}` is {count} but M = {}",
                    file.m
                )));
            }
            if occurrence.insert(term.clone(), *count).is_some() {
                return Err(ProviderError::InvalidTable(format!(
                    "terms collide after normalization: `{term}`"
                )));
            }
        }

        let mut cooccurrence = HashMap::with_capacity(file.cooccurrence.len());
        for entry in &file.cooccurrence {
            let a = normalize(&entry.a)?;
            let b = normalize(&entry.b)?;
            let occ_a = occurrence.get(&a).copied().unwrap_or(0);
            let occ_b = occurrence.get(&b).copied().unwrap_or(0);
            if a == b {
                if entry.count != occ_a {
                    return Err(ProviderError::InvalidTable(format!(
                        "diagonal entry for `{a}` must equal its occurrence ({occ_a}), got {}",
                        entry.count
                    )));
                }
                continue;
            }
            if entry.count > occ_a.min(occ_b) {
                return Err(ProviderError::InvalidTable(format!(
                    "co-occurrence of `{a}`/`{b}` is {} but occurrences are {occ_a}/{occ_b}",
                    entry.count
                )));
            }
            let key = ordered(a, b);
            if cooccurrence.insert(key.clone(), entry.count).is_some() {
                return Err(ProviderError::InvalidTable(format!(
                    "duplicate co-occurrence entry for `{}`/`{}`",
                    key.0, key.1
                )));
            }
        }

        Ok(TableProvider {
            m: file.m,
            occurrence,
            cooccurrence,
            source,
        })
    }
}

fn ordered(a: String, b: String) -> (String, String) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl CountProvider for TableProvider {
    fn occurrence(&self, term: &Term) -> Result<u64, ProviderError> {
        Ok(self
            .occurrence
            .get(&term.normalized())
            .copied()
            .unwrap_or(0))
    }

    fn cooccurrence(&self, x: &Term, y: &Term) -> Result<u64, ProviderError> {
        if x == y {
            return self.occurrence(x);
        }
        let key = ordered(x.normalized(), y.normalized());
        Ok(self.cooccurrence.get(&key).copied().unwrap_or(0))
    }

    fn corpus_size(&self) -> u64 {
        self.m
    }

    fn provider_id(&self) -> String {
        format!("table:{}", self.source)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn term(s: &str) -> Term {
        Term::parse(s).unwrap()
    }

    fn golden() -> TableProvider {
        TableProvider::from_parts(
            1000,
            [("a", 100), ("b", 100), ("c", 10)],
            [("a", "b", 50), ("a", "c", 10), ("b", "c", 1)],
        )
        .unwrap()
    }

    #[test]
    fn golden_fixture_counts() {
        let table = golden();
        assert_eq!(table.occurrence(&term("a")).unwrap(), 100);
        assert_eq!(table.cooccurrence(&term("b"), &term("c")).unwrap(), 1);
        assert_eq!(table.cooccurrence(&term("c"), &term("b")).unwrap(), 1);
        assert_eq!(table.corpus_size(), 1000);
    }

    #[test]
    fn missing_entries_answer_zero() {
        let table = golden();
        assert_eq!(table.occurrence(&term("zebra")).unwrap(), 0);
        assert_eq!(table.cooccurrence(&term("a"), &term("zebra")).unwrap(), 0);
    }

    #[test]
    fn diagonal_answers_occurrence() {
        let table = golden();
        assert_eq!(table.cooccurrence(&term("c"), &term("c")).unwrap(), 10);
    }

    #[test]
    fn occurrence_above_corpus_size_is_invalid() {
        let result = TableProvider::from_parts(1000, [("a", 2000)], []);
        assert!(matches!(result, Err(ProviderError::InvalidTable(_))));
    }

    #[test]
    fn cooccurrence_above_occurrence_is_invalid() {
        let result = TableProvider::from_parts(1000, [("a", 10), ("b", 10)], [("a", "b", 11)]);
        assert!(matches!(result, Err(ProviderError::InvalidTable(_))));
    }

    #[test]
    fn normalization_collision_is_invalid() {
        let result = TableProvider::from_parts(1000, [("Cat", 10), ("cat", 5)], []);
        assert!(matches!(result, Err(ProviderError::InvalidTable(_))));
    }

    #[test]
    fn terms_are_normalized_at_load() {
        let table = TableProvider::from_parts(100, [("New York", 7)], []).unwrap();
        assert_eq!(table.occurrence(&term("new  york")).unwrap(), 7);
    }

    #[test]
    fn malformed_json_reports_location() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        write!(file, "{{\"M\": 10, \"occurrence\": {{").unwrap();
        let err = load_count_table(file.path()).unwrap_err();
        match err {
            ProviderError::Parse { message, .. } => {
                assert!(message.contains("line"), "got: {message}")
            }
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn loads_from_file() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        write!(
            file,
            r#"{{"M": 1000,
                "occurrence": {{"a": 100, "b": 100, "c": 10}},
                "cooccurrence": [
                    {{"a": "a", "b": "b", "count": 50}},
                    {{"a": "a", "b": "c", "count": 10}},
                    {{"a": "b", "b": "c", "count": 1}}
                ]}}"#
        )
        .unwrap();
        let table = load_count_table(file.path()).unwrap();
        assert_eq!(table.occurrence(&term("c")).unwrap(), 10);
        assert_eq!(table.cooccurrence(&term("a"), &term("b")).unwrap(), 50);
    }
}
