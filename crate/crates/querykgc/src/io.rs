//! File formats and the on-disk layout of a pipeline directory.

use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use querykgc_core::ingest::{LoadReport, ParseMode, RawGraph};
use querykgc_core::kg::{Split, Triplet};
use querykgc_core::sparql::{LogMiner, SparqlParser};
use querykgc_core::{KnowledgeGraph, Vocabulary};

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    NTriples,
    Tsv,
}

impl GraphFormat {
    pub fn resolve(setting: &str, path: &Path) -> Result<Self, Failure> {
        match setting {
            "nt" => Ok(Self::NTriples),
            "tsv" => Ok(Self::Tsv),
            "auto" => match path.extension().and_then(|e| e.to_str()) {
                Some("nt") => Ok(Self::NTriples),
                Some("tsv" | "txt") => Ok(Self::Tsv),
                _ => Err(Failure::Usage(format!(
                    "cannot infer the format of {}; set format=nt or format=tsv",
                    path.display()
                ))),
            },
            other => Err(Failure::Usage(format!("unknown graph format `{other}`"))),
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    let file = File::open(path)
        .map_err(|e| Failure::Usage(format!("cannot open {}: {e}", path.display())))?;
    Ok(BufReader::new(file))
}

/// Streams a triplet file line by line.
pub fn load_graph(
    path: &Path,
    format: GraphFormat,
    mode: ParseMode,
) -> Result<(RawGraph, LoadReport), Failure> {
    let reader = open(path)?;
    let mut raw = RawGraph::new();
    let mut report = LoadReport::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        match format {
            GraphFormat::NTriples => raw.push_ntriples_line(i + 1, &line, mode, &mut report),
            GraphFormat::Tsv => raw.push_tsv_line(i + 1, &line, mode, &mut report),
        }
        .with_context(|| format!("loading {}", path.display()))?;
    }
    Ok((raw, report))
}

/// Streams a query log through a [`LogMiner`].
pub fn mine_log(path: &Path, decode: bool) -> Result<LogMiner, Failure> {
    let reader = open(path)?;
    let mut miner = LogMiner::new(SparqlParser::new());
    for line in reader.lines() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        miner.add_line(&line, decode);
    }
    Ok(miner)
}

pub fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

pub fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Paths of every artifact inside a pipeline directory.
#[derive(Clone, Debug)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn kg_dir(&self) -> PathBuf {
        self.root.join("kg")
    }

    pub fn entities(&self) -> PathBuf {
        self.kg_dir().join("entities.txt")
    }

    pub fn predicates(&self) -> PathBuf {
        self.kg_dir().join("predicates.txt")
    }

    pub fn split(&self, split: Split) -> PathBuf {
        self.kg_dir().join(format!("{}.tsv", split.as_str()))
    }

    pub fn pairs(&self) -> PathBuf {
        self.root.join("pairs.tsv")
    }

    pub fn model(&self) -> PathBuf {
        self.root.join("model.txt")
    }

    pub fn predictions(&self, method: &str) -> PathBuf {
        self.root
            .join("predictions")
            .join(format!("{}.tsv", method.to_ascii_lowercase()))
    }

    pub fn km(&self, method: &str) -> PathBuf {
        self.root
            .join("guidance")
            .join(format!("km-{}.tsv", method.to_ascii_lowercase()))
    }

    pub fn es(&self, method: &str) -> PathBuf {
        self.root
            .join("guidance")
            .join(format!("es-{}.tsv", method.to_ascii_lowercase()))
    }

    pub fn eval(&self, method: &str, ext: &str) -> PathBuf {
        self.root
            .join("eval")
            .join(format!("{}.{ext}", method.to_ascii_lowercase()))
    }

    pub fn es_bins(&self, method: &str) -> PathBuf {
        self.root
            .join("eval")
            .join(format!("es-bins-{}.tsv", method.to_ascii_lowercase()))
    }

    pub fn annotation(&self, method: &str) -> PathBuf {
        self.root
            .join("annotation")
            .join(format!("{}.tsv", method.to_ascii_lowercase()))
    }

    pub fn report(&self, name: &str) -> PathBuf {
        self.root.join("reports").join(format!("{name}.txt"))
    }

    /// Fails with a usage error naming `command` when `path` is missing.
    pub fn require(&self, path: &Path, command: &'static str) -> Result<(), Failure> {
        if path.is_file() {
            Ok(())
        } else {
            Err(Failure::Missing {
                artifact: path.to_path_buf(),
                command,
            })
        }
    }

    pub fn save_kg(&self, kg: &KnowledgeGraph) -> Result<(), Failure> {
        write(&self.entities(), &kg.entities().to_text())?;
        write(&self.predicates(), &kg.predicates().to_text())?;
        for split in Split::ALL {
            let mut out = String::new();
            for (t, s) in kg.iter() {
                if s == split {
                    out.push_str(kg.entities().label(t.head)?);
                    out.push('\t');
                    out.push_str(kg.predicates().label(t.predicate)?);
                    out.push('\t');
                    out.push_str(kg.entities().label(t.tail)?);
                    out.push('\n');
                }
            }
            write(&self.split(split), &out)?;
        }
        Ok(())
    }

    pub fn load_kg(&self) -> Result<KnowledgeGraph, Failure> {
        self.require(&self.entities(), "ingest")?;
        let entities = Vocabulary::from_text("entity", &read_input(&self.entities())?)?;
        let predicates = Vocabulary::from_text("predicate", &read_input(&self.predicates())?)?;
        let mut parts: [Vec<Triplet>; 3] = Default::default();
        for (i, split) in Split::ALL.into_iter().enumerate() {
            let path = self.split(split);
            self.require(&path, "ingest")?;
            for (n, line) in read_input(&path)?.lines().enumerate() {
                let fields: Vec<&str> = line.split('\t').collect();
                let [h, r, t] = fields[..] else {
                    return Err(Failure::Internal(anyhow::anyhow!(
                        "{}:{}: expected 3 tab-separated fields",
                        path.display(),
                        n + 1
                    )));
                };
                parts[i].push(Triplet::new(
                    entities.lookup(h)?,
                    predicates.lookup(r)?,
                    entities.lookup(t)?,
                ));
            }
        }
        let [train, dev, test] = parts;
        Ok(KnowledgeGraph::from_splits(
            entities, predicates, train, dev, test,
        )?)
    }
}
