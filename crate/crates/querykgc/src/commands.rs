//! One function per subcommand. Each reads its inputs from a [`Layout`],
//! writes its artifacts and a report, and returns a short summary for the
//! terminal.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use log::{info, warn};
use querykgc_core::eval::{self, EvalReport, TestPairIndex};
use querykgc_core::guidance::{self, KmReason};
use querykgc_core::ingest::{self, MetadataTable, ParseMode, SanitizeRules};
use querykgc_core::predict::{self, Method, PairWeighting, Prediction, SamplerConfig};
use querykgc_core::rotate::{self, Norm, RotatEModel, TrainConfig};
use querykgc_core::sparql::QueryPairTable;
use querykgc_core::synth::{self, SynthConfig};
use querykgc_core::{EntityPredicatePair, KnowledgeGraph, Orientation};

use crate::io::{self, GraphFormat, Layout};
use crate::{Failure, RayonExecutor, Settings};

pub struct Context {
    pub layout: Layout,
    pub settings: Settings,
    exec: RayonExecutor,
}

/// Plain-text report that starts with the command name and config digest.
struct Report {
    text: String,
}

impl Report {
    fn new(command: &str, settings: &Settings) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "command={command}");
        let _ = writeln!(text, "config_digest={}", settings.digest());
        Self { text }
    }

    fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{key}={value}");
    }

    fn section(&mut self, name: &str, body: &str) {
        let _ = writeln!(self.text, "[{name}]");
        self.text.push_str(body);
    }

    fn save(self, layout: &Layout, name: &str) -> Result<(), Failure> {
        io::write(&layout.report(name), &self.text)
    }
}

fn parse_with<T>(
    settings: &Settings,
    key: &str,
    parse: fn(&str) -> Option<T>,
) -> Result<T, Failure> {
    let raw = settings.raw(key).unwrap_or_default();
    parse(raw).ok_or_else(|| Failure::Usage(format!("invalid value `{raw}` for `{key}`")))
}

fn parse_ratios(raw: &str) -> Result<[f64; 3], Failure> {
    let parts: Vec<f64> = raw
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("invalid ratios `{raw}`")))?;
    <[f64; 3]>::try_from(parts)
        .map_err(|_| Failure::Usage(format!("ratios need three values, got `{raw}`")))
}

impl Context {
    pub fn new(root: impl AsRef<Path>, settings: Settings) -> Result<Self, Failure> {
        let threads: usize = settings.get("threads")?;
        if threads == 0 {
            return Err(Failure::Usage("threads must be at least 1".into()));
        }
        Ok(Self {
            layout: Layout::new(root.as_ref()),
            exec: RayonExecutor::new(threads)?,
            settings,
        })
    }

    fn orientation(&self) -> Result<Orientation, Failure> {
        parse_with(&self.settings, "orientation", Orientation::parse)
    }

    fn sampler(&self) -> Result<SamplerConfig, Failure> {
        Ok(SamplerConfig {
            block_size: self.settings.get("block_size")?,
            starvation_blocks: self.settings.get("starvation_blocks")?,
        })
    }

    pub fn train_config(&self) -> Result<TrainConfig, Failure> {
        let s = &self.settings;
        let negatives: usize = s.get("negatives")?;
        let negative_weight = match s.raw("negative_weight") {
            Some(_) => s.get("negative_weight")?,
            None => negatives as f64,
        };
        Ok(TrainConfig {
            dim: s.get("dim")?,
            gamma: s.get("gamma")?,
            negatives,
            negative_weight,
            learning_rate: s.get("learning_rate")?,
            epochs: s.get("epochs")?,
            batch_size: s.get("batch_size")?,
            seed: s.seed()?,
            norm: parse_with(s, "norm", Norm::parse)?,
        })
    }

    fn load_model(&self, kg: &KnowledgeGraph) -> Result<RotatEModel, Failure> {
        let path = self.layout.model();
        self.layout.require(&path, "train")?;
        let model = RotatEModel::from_text(&io::read_input(&path)?)?;
        model.check_vocab(kg)?;
        Ok(model)
    }

    fn load_pairs(&self, kg: &KnowledgeGraph) -> Result<QueryPairTable, Failure> {
        let path = self.layout.pairs();
        self.layout.require(&path, "mine")?;
        Ok(QueryPairTable::from_tsv(&io::read_input(&path)?, kg)?)
    }

    fn load_predictions(
        &self,
        kg: &KnowledgeGraph,
        method: Method,
    ) -> Result<Vec<Prediction>, Failure> {
        let path = self.layout.predictions(method.as_str());
        self.layout.require(&path, "predict")?;
        Ok(predict::predictions_from_tsv(&io::read_input(&path)?, kg)?)
    }

    pub fn ingest(&self, kg_path: &Path, log_path: &Path) -> Result<String, Failure> {
        let s = &self.settings;
        let seed = s.seed()?;
        let ratios = parse_ratios(s.raw("ratios").unwrap_or_default())?;
        let format = GraphFormat::resolve(s.raw("format").unwrap_or("auto"), kg_path)?;
        let mode = if s.get_bool("strict")? {
            ParseMode::Strict
        } else {
            ParseMode::Lenient
        };
        let (raw, load) = io::load_graph(kg_path, format, mode)?;
        info!("loaded {} triplets from {}", raw.len(), kg_path.display());
        let miner = io::mine_log(log_path, s.get_bool("decode")?)?;
        let list_prefix = s
            .raw("list_prefix")
            .filter(|p| !p.is_empty())
            .map(String::from);
        let rules = SanitizeRules {
            drop_numeric: s.get_bool("drop_numeric")?,
            drop_url_only: s.get_bool("drop_url_only")?,
            list_prefix,
        };
        let (kg, sanitized) = ingest::sanitize(&raw, &miner.mentions, &rules)?;
        let kg = ingest::split(kg, ratios, seed)?;
        self.layout.save_kg(&kg)?;

        let [train, dev, test] = kg.split_sizes();
        let mut report = Report::new("ingest", s);
        report.section("load", &load.to_text());
        report.section("query_log", &miner.stats_text());
        report.section("sanitize", &sanitized.to_text());
        report.section("split", &format!("train={train}\ndev={dev}\ntest={test}\n"));
        report.save(&self.layout, "ingest")?;
        if load.malformed > 0 {
            warn!("{} malformed lines skipped", load.malformed);
        }
        Ok(format!(
            "kept {} of {} triplets ({} entities, {} predicates); split {train}/{dev}/{test}",
            sanitized.kept,
            sanitized.input,
            kg.num_entities(),
            kg.num_predicates()
        ))
    }

    pub fn mine(&self, log_path: &Path) -> Result<String, Failure> {
        let kg = self.layout.load_kg()?;
        let miner = io::mine_log(log_path, self.settings.get_bool("decode")?)?;
        let (table, stats) = QueryPairTable::resolve(&miner.pairs, &kg);
        io::write(&self.layout.pairs(), &table.to_tsv(&kg)?)?;
        let mut report = Report::new("mine", &self.settings);
        report.section("query_log", &miner.stats_text());
        report.line("kept_pairs", stats.kept_pairs);
        report.line("dropped_pairs", stats.dropped_pairs);
        report.line("dropped_frequency", stats.dropped_frequency);
        for o in [Orientation::SubjectKnown, Orientation::ObjectKnown] {
            report.line(&format!("pairs.{}", o.as_str()), table.pairs(o).len());
            report.line(
                &format!("frequency.{}", o.as_str()),
                table.total_frequency(o),
            );
        }
        report.save(&self.layout, "mine")?;
        Ok(format!(
            "{} queries ({:.1}% SELECT); {} pairs kept, {} dropped",
            miner.total_queries(),
            100.0 * miner.select_fraction(),
            stats.kept_pairs,
            stats.dropped_pairs
        ))
    }

    pub fn train(&self) -> Result<String, Failure> {
        let cfg = self.train_config()?;
        let kg = self.layout.load_kg()?;
        let (model, trace) = rotate::train(&kg, &cfg, &self.exec)?;
        io::write(&self.layout.model(), &model.to_text())?;
        let mut report = Report::new("train", &self.settings);
        let first = trace.epoch_losses.first().copied().unwrap_or(f64::NAN);
        let last = trace.epoch_losses.last().copied().unwrap_or(f64::NAN);
        report.line("epochs", trace.epoch_losses.len());
        report.line("first_epoch_loss", format!("{first:.12}"));
        report.line("last_epoch_loss", format!("{last:.12}"));
        report.section("trace", &trace.to_text());
        report.save(&self.layout, "train")?;
        Ok(format!(
            "trained {} epochs: loss {first:.4} -> {last:.4}",
            trace.epoch_losses.len()
        ))
    }

    pub fn predict(&self, method: Method) -> Result<String, Failure> {
        let s = &self.settings;
        let kg = self.layout.load_kg()?;
        let model = self.load_model(&kg)?;
        let orientation = self.orientation()?;
        let n: usize = s.get("predictions")?;
        let mut report = Report::new(
            &format!("predict-{}", method.as_str().to_ascii_lowercase()),
            s,
        );
        let predictions = match method {
            Method::Rs => {
                predict::predict_rs(&model, &kg, n, s.seed()?, &self.sampler()?, &self.exec)?
            }
            Method::Qg => {
                let table = self.load_pairs(&kg)?;
                let weighting = parse_with(s, "weighting", PairWeighting::parse)?;
                predict::predict_qg(
                    &model,
                    &kg,
                    &table,
                    n,
                    s.seed()?,
                    orientation,
                    weighting,
                    &self.sampler()?,
                    &self.exec,
                )?
            }
            Method::TopK => {
                let table = self.load_pairs(&kg)?;
                let k: usize = s.get("top_k")?;
                let outcome =
                    predict::predict_topk(&model, &kg, &table, k, s.get("per_pair")?, orientation)?;
                if outcome.truncated {
                    warn!(
                        "top_k={k} exceeds the pair table; using all {} pairs",
                        outcome.pairs_used
                    );
                }
                report.line("pairs_used", outcome.pairs_used);
                report.line("truncated", outcome.truncated);
                report.line("train_dev_collisions", outcome.collisions);
                outcome.predictions
            }
        };
        io::write(
            &self.layout.predictions(method.as_str()),
            &predict::predictions_to_tsv(&predictions, &kg)?,
        )?;
        report.line("predictions", predictions.len());
        if method != Method::Rs {
            let counts = predict::per_pair_counts(&predictions);
            let min = counts.values().min().copied().unwrap_or(0);
            let max = counts.values().max().copied().unwrap_or(0);
            report.line("guiding_pairs_hit", counts.len());
            report.line("per_pair_min", min);
            report.line("per_pair_max", max);
        }
        report.save(
            &self.layout,
            &format!("predict-{}", method.as_str().to_ascii_lowercase()),
        )?;
        Ok(format!(
            "{} {} predictions",
            predictions.len(),
            method.as_str()
        ))
    }

    pub fn guide_km(
        &self,
        method: Method,
        entity_types: &Path,
        domain_range: &Path,
    ) -> Result<String, Failure> {
        let kg = self.layout.load_kg()?;
        let predictions = self.load_predictions(&kg, method)?;
        let types_text = io::read_input(entity_types)?;
        let dr_text = io::read_input(domain_range)?;
        let (metadata, meta_report) = MetadataTable::parse(&types_text, &dr_text, &kg);
        for w in &meta_report.warnings {
            warn!("{w}");
        }
        let pairs = eval::pairs_from_predictions(&predictions, self.orientation()?);
        let verdicts = guidance::km_classify_all(&pairs, &metadata, &kg)?;
        io::write(
            &self.layout.km(method.as_str()),
            &guidance::km_to_tsv(&verdicts, &kg)?,
        )?;

        let mut reasons: BTreeMap<KmReason, usize> = BTreeMap::new();
        for v in &verdicts {
            *reasons.entry(v.reason).or_default() += 1;
        }
        let compatible = verdicts.iter().filter(|v| v.compatible).count();
        let mut report = Report::new(
            &format!("guide-km-{}", method.as_str().to_ascii_lowercase()),
            &self.settings,
        );
        report.line("entity_type_rows", meta_report.entity_rows);
        report.line("predicate_rows", meta_report.predicate_rows);
        report.line("unknown_entities", meta_report.unknown_entities);
        report.line("unknown_predicates", meta_report.unknown_predicates);
        report.line("malformed_rows", meta_report.malformed);
        report.line("pairs", verdicts.len());
        report.line("compatible", compatible);
        report.line("incompatible", verdicts.len() - compatible);
        for (reason, n) in &reasons {
            report.line(&format!("reason.{}", reason.as_str()), n);
        }
        report.save(
            &self.layout,
            &format!("guide-km-{}", method.as_str().to_ascii_lowercase()),
        )?;
        Ok(format!(
            "{compatible} of {} {} pairs compatible with the metadata",
            verdicts.len(),
            method.as_str()
        ))
    }

    pub fn guide_es(&self, method: Method) -> Result<String, Failure> {
        let kg = self.layout.load_kg()?;
        let predictions = self.load_predictions(&kg, method)?;
        let bins: usize = self.settings.get("es_bins")?;
        let binning = guidance::es_bin_with(&predictions, self.orientation()?, bins)?;
        if binning.num_bins < bins {
            warn!(
                "only {} pairs for {bins} bins; using singleton bins",
                binning.entries.len()
            );
        }
        io::write(&self.layout.es(method.as_str()), &binning.to_tsv(&kg)?)?;
        let mut report = Report::new(
            &format!("guide-es-{}", method.as_str().to_ascii_lowercase()),
            &self.settings,
        );
        report.line("pairs", binning.entries.len());
        report.line("bins", binning.num_bins);
        report.save(
            &self.layout,
            &format!("guide-es-{}", method.as_str().to_ascii_lowercase()),
        )?;
        Ok(format!(
            "{} {} pairs in {} score bins",
            binning.entries.len(),
            method.as_str(),
            binning.num_bins
        ))
    }

    /// Reads a guidance TSV back as (pair, group column) rows.
    fn read_groups(
        &self,
        path: &Path,
        kg: &KnowledgeGraph,
    ) -> Result<Vec<(EntityPredicatePair, String)>, Failure> {
        let orientation = self.orientation()?;
        let mut rows = Vec::new();
        for (i, line) in io::read_input(path)?.lines().enumerate() {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 4 {
                return Err(Failure::Internal(anyhow::anyhow!(
                    "{}:{}: expected 4 fields",
                    path.display(),
                    i + 1
                )));
            }
            let pair = EntityPredicatePair::new(
                kg.entities().lookup(fields[0])?,
                kg.predicates().lookup(fields[1])?,
                orientation,
            );
            let group = if fields[2] == "true" || fields[2] == "false" {
                fields[2]
            } else {
                fields[3]
            };
            rows.push((pair, group.to_string()));
        }
        Ok(rows)
    }

    pub fn eval(&self, method: Method) -> Result<String, Failure> {
        let kg = self.layout.load_kg()?;
        let predictions = self.load_predictions(&kg, method)?;
        let mut result =
            EvalReport::evaluate(method.as_str(), &predictions, &kg, self.orientation()?)?;
        let index = TestPairIndex::new(&kg);

        let km_path = self.layout.km(method.as_str());
        if km_path.is_file() {
            let rows = self.read_groups(&km_path, &kg)?;
            let labels = vec!["compatible".to_string(), "incompatible".to_string()];
            let groups = eval::group_precision(
                &labels,
                rows.iter().map(|(p, g)| (usize::from(g != "true"), p)),
                &index,
            )?;
            result.groups.push(("km".into(), groups));
        }
        let es_path = self.layout.es(method.as_str());
        if es_path.is_file() {
            let rows = self.read_groups(&es_path, &kg)?;
            let mut assigned = Vec::with_capacity(rows.len());
            for (pair, bin) in &rows {
                let bin: usize = bin.parse().map_err(|_| {
                    Failure::Internal(anyhow::anyhow!("bad bin `{bin}` in {}", es_path.display()))
                })?;
                assigned.push((bin, pair));
            }
            let bins = assigned.iter().map(|(b, _)| b + 1).max().unwrap_or(0);
            let labels: Vec<String> = (0..bins).map(|b| b.to_string()).collect();
            let groups = eval::group_precision(&labels, assigned, &index)?;
            let mut tsv = String::from("bin\tprecision\n");
            for g in &groups {
                let _ = writeln!(tsv, "{}\t{}", g.label, g.precision_text());
            }
            io::write(&self.layout.es_bins(method.as_str()), &tsv)?;
            result.groups.push(("es".into(), groups));
        }

        let mut text = Report::new(
            &format!("eval-{}", method.as_str().to_ascii_lowercase()),
            &self.settings,
        )
        .text;
        text.push_str(&result.to_text());
        io::write(&self.layout.eval(method.as_str(), "txt"), &text)?;
        io::write(&self.layout.eval(method.as_str(), "tsv"), &result.to_tsv())?;
        Ok(format!(
            "{}: {} hit triplets, pair precision {:.4} over {} pairs",
            method.as_str(),
            result.hit_triplets,
            result.pair_precision,
            result.predicted_pair_count
        ))
    }

    pub fn export(&self, method: Method) -> Result<String, Failure> {
        let seed = self.settings.seed()?;
        let n: usize = self.settings.get("sample_size")?;
        let kg = self.layout.load_kg()?;
        let predictions = self.load_predictions(&kg, method)?;
        let pairs = eval::pairs_from_predictions(&predictions, self.orientation()?);
        let (sample, short) = eval::annotation_sample(&pairs, n, seed);
        if short {
            warn!(
                "only {} pairs available; exporting all of them",
                pairs.len()
            );
        }
        let path = self.layout.annotation(method.as_str());
        io::write(
            &path,
            &eval::annotation_sheet(&sample, &kg, method.as_str())?,
        )?;
        Ok(format!(
            "{} pairs written to {}",
            sample.len(),
            path.display()
        ))
    }

    /// Whole pipeline: both sampling methods, guidance, evaluation and
    /// annotation sheets.
    pub fn run(&self, inputs: &PipelineInputs) -> Result<Vec<String>, Failure> {
        let mut lines = vec![
            self.ingest(&inputs.kg, &inputs.log)?,
            self.mine(&inputs.log)?,
            self.train()?,
        ];
        for method in [Method::Rs, Method::Qg] {
            lines.push(self.predict(method)?);
            if let Some((types, dr)) = &inputs.metadata {
                lines.push(self.guide_km(method, types, dr)?);
            }
            lines.push(self.guide_es(method)?);
            lines.push(self.eval(method)?);
            lines.push(self.export(method)?);
        }
        Ok(lines)
    }
}

pub struct PipelineInputs {
    pub kg: std::path::PathBuf,
    pub log: std::path::PathBuf,
    pub metadata: Option<(std::path::PathBuf, std::path::PathBuf)>,
}

pub fn rc_ratio(path: &Path) -> Result<String, Failure> {
    let summary = eval::rc_ratio(&io::read_input(path)?)?;
    if !summary.relevant_not_correct.is_empty() {
        warn!(
            "{} rows marked relevant but not correct were ignored (lines {:?})",
            summary.relevant_not_correct.len(),
            summary.relevant_not_correct
        );
    }
    Ok(format!(
        "R/C {:.4} ({} relevant of {} correct, {} rows)",
        summary.ratio, summary.relevant_and_correct, summary.correct, summary.rows
    ))
}

/// Training and sampling settings that suit the generated benchmark.
pub const SYNTH_SETTINGS: &str = "\
dim=32
gamma=6
learning_rate=2
epochs=100
predictions=3000
starvation_blocks=2000
";

/// Writes a generated benchmark plus a matching settings file into `out`.
pub fn synth(out: &Path, seed: u64) -> Result<String, Failure> {
    let bench = synth::generate(&SynthConfig {
        seed,
        ..SynthConfig::default()
    })?;
    io::write(&out.join("kg.tsv"), &bench.kg_tsv)?;
    io::write(&out.join("queries.log"), &bench.query_log)?;
    io::write(&out.join("entity_types.tsv"), &bench.entity_types)?;
    io::write(&out.join("domain_range.tsv"), &bench.domain_range)?;
    io::write(
        &out.join("settings.conf"),
        &format!("seed={seed}\n{SYNTH_SETTINGS}"),
    )?;
    Ok(format!(
        "{} triplets, {} entities, {} predicates written to {}",
        bench.kg.len(),
        bench.kg.num_entities(),
        bench.kg.num_predicates(),
        out.display()
    ))
}
