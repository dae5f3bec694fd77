//! File formats: instance and packing JSON, placement traces (JSON lines),
//! report and trajectory CSV, and an on-disk oracle cache.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{AdversaryRound, InstanceMeta};
use crate::metrics::{compute_stretch, OptSource};
use crate::model::{Bin, BinId, BinKind, Colour, Instance, Item, ItemId, Packing, Provenance, Region};
use crate::online::Placement;
use crate::oracle::{self, instance_digest, OracleConfig, OracleResult};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub size: Rational,
    pub colour: Colour,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<ItemId>,
}

/// `{"m": 3, "items": [{"size": "1/2", "colour": 1}, ...]}`. Items without
/// an explicit id are numbered by position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub m: u32,
    pub items: Vec<ItemRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<InstanceMeta>,
}

impl InstanceFile {
    pub fn from_instance(instance: &Instance, meta: Option<InstanceMeta>) -> Self {
        let sequential = instance.items.iter().enumerate().all(|(i, e)| e.id == i);
        InstanceFile {
            m: instance.m,
            items: instance
                .items
                .iter()
                .map(|e| ItemRecord {
                    size: e.size,
                    colour: e.colour,
                    id: (!sequential).then_some(e.id),
                })
                .collect(),
            meta,
        }
    }

    pub fn to_instance(&self) -> Result<Instance> {
        let items = self
            .items
            .iter()
            .enumerate()
            .map(|(i, r)| Item {
                id: r.id.unwrap_or(i),
                size: r.size,
                colour: r.colour,
            })
            .collect();
        Instance::new(self.m, items)
    }
}

pub fn parse_instance(json: &str) -> Result<(Instance, Option<InstanceMeta>)> {
    let file: InstanceFile = serde_json::from_str(json)?;
    Ok((file.to_instance()?, file.meta))
}

pub fn read_instance(path: &Path) -> Result<(Instance, Option<InstanceMeta>)> {
    parse_instance(&fs::read_to_string(path)?)
}

pub fn instance_to_json(instance: &Instance, meta: Option<&InstanceMeta>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&InstanceFile::from_instance(
        instance,
        meta.cloned(),
    ))?)
}

pub fn write_instance(path: &Path, instance: &Instance, meta: Option<&InstanceMeta>) -> Result<()> {
    fs::write(path, instance_to_json(instance, meta)? + "\n")?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionRecord {
    pub capacity: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colour: Option<Colour>,
    pub items: Vec<ItemId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinRecord {
    pub id: BinId,
    pub kind: BinKind,
    pub items: Vec<ItemId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<Vec<RegionRecord>>,
}

/// Bins as lists of item ids; sizes live in the instance file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingFile {
    pub algorithm: String,
    pub params: String,
    pub bins: Vec<BinRecord>,
}

impl PackingFile {
    pub fn from_packing(packing: &Packing) -> Self {
        PackingFile {
            algorithm: packing.provenance.algorithm.clone(),
            params: packing.provenance.params.clone(),
            bins: packing
                .bins
                .iter()
                .filter(|b| !b.is_empty())
                .map(|b| BinRecord {
                    id: b.id,
                    kind: b.kind,
                    items: b.items.iter().map(|e| e.id).collect(),
                    regions: b.regions.as_ref().map(|rs| {
                        rs.iter()
                            .map(|r| RegionRecord {
                                capacity: r.capacity,
                                colour: r.colour,
                                items: r.items.clone(),
                            })
                            .collect()
                    }),
                })
                .collect(),
        }
    }

    /// Resolves item ids against `instance`.
    pub fn to_packing(&self, instance: &Instance) -> Result<Packing> {
        let by_id = instance.index_by_id();
        let lookup = |id: &ItemId| {
            by_id
                .get(id)
                .map(|&e| e.clone())
                .ok_or_else(|| Error::InvalidInstance(format!("packing refers to unknown item {id}")))
        };
        let mut bins = Vec::with_capacity(self.bins.len());
        for rec in &self.bins {
            let mut bin = Bin::with_kind(rec.id, rec.kind);
            for id in &rec.items {
                bin.push(lookup(id)?);
            }
            if let Some(regions) = &rec.regions {
                let mut out = Vec::with_capacity(regions.len());
                for r in regions {
                    let mut region = Region::empty(r.capacity);
                    region.colour = r.colour;
                    for id in &r.items {
                        region.used += lookup(id)?.size;
                    }
                    region.items = r.items.clone();
                    out.push(region);
                }
                bin.regions = Some(out);
            }
            bins.push(bin);
        }
        Ok(Packing::new(
            bins,
            Provenance::new(self.algorithm.clone(), self.params.clone()),
        ))
    }
}

pub fn packing_to_json(packing: &Packing) -> Result<String> {
    Ok(serde_json::to_string_pretty(&PackingFile::from_packing(packing))?)
}

pub fn write_packing(path: &Path, packing: &Packing) -> Result<()> {
    fs::write(path, packing_to_json(packing)? + "\n")?;
    Ok(())
}

pub fn read_packing(path: &Path, instance: &Instance) -> Result<Packing> {
    let file: PackingFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    file.to_packing(instance)
}

/// One JSON object per line.
pub fn write_trace<W: Write>(mut out: W, trace: &[Placement]) -> Result<()> {
    for p in trace {
        serde_json::to_writer(&mut out, p)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<Placement>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// One row of the benchmark report. `error` is empty on success.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub instance: String,
    pub algorithm: String,
    pub params: String,
    pub total_bins: Option<usize>,
    pub opt_bins: Option<usize>,
    pub opt_source: Option<OptSource>,
    pub bin_stretch: Option<Rational>,
    pub max_colour_stretch: Option<Rational>,
    pub error: String,
}

impl ReportRow {
    pub fn measured(
        name: &str,
        packing: &Packing,
        instance: &Instance,
        oracle: Option<&OracleResult>,
    ) -> Result<Self> {
        let report = compute_stretch(packing, instance, oracle)?;
        Ok(ReportRow {
            instance: name.into(),
            algorithm: packing.provenance.algorithm.clone(),
            params: packing.provenance.params.clone(),
            total_bins: Some(report.total_bins),
            opt_bins: Some(report.opt_bins),
            opt_source: Some(report.opt_source),
            bin_stretch: Some(report.bin_stretch),
            max_colour_stretch: Some(report.colour_stretch),
            error: String::new(),
        })
    }

    pub fn failed(name: &str, algorithm: &str, params: &str, error: &Error) -> Self {
        ReportRow {
            instance: name.into(),
            algorithm: algorithm.into(),
            params: params.into(),
            total_bins: None,
            opt_bins: None,
            opt_source: None,
            bin_stretch: None,
            max_colour_stretch: None,
            error: error.to_string(),
        }
    }
}

pub fn write_report<W: Write>(out: W, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report<R: std::io::Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_trajectory<W: Write>(out: W, rounds: &[AdversaryRound]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rounds {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Environment variable naming the oracle cache directory.
pub const ORACLE_CACHE_ENV: &str = "LOCPACK_ORACLE_CACHE";

/// Oracle results stored as `<digest>.json`, keyed also by β when present.
#[derive(Debug, Clone)]
pub struct OracleCache {
    dir: PathBuf,
}

impl OracleCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(OracleCache { dir })
    }

    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var_os(ORACLE_CACHE_ENV) {
            Some(dir) if !dir.is_empty() => Ok(Some(Self::new(dir)?)),
            _ => Ok(None),
        }
    }

    fn path(&self, digest: &str, beta: Option<Rational>) -> PathBuf {
        let name = match beta {
            Some(b) => format!("{digest}-beta-{}-{}.json", b.numer(), b.denom()),
            None => format!("{digest}.json"),
        };
        self.dir.join(name)
    }

    pub fn get(&self, instance: &Instance, beta: Option<Rational>) -> Result<Option<OracleResult>> {
        let digest = instance_digest(instance);
        let path = self.path(&digest, beta);
        if !path.exists() {
            return Ok(None);
        }
        let result: OracleResult = serde_json::from_str(&fs::read_to_string(&path)?)?;
        if result.instance_digest != digest {
            return Err(Error::OracleMismatch(format!(
                "cache entry {} holds digest {}",
                path.display(),
                result.instance_digest
            )));
        }
        Ok(Some(result))
    }

    pub fn put(&self, result: &OracleResult) -> Result<()> {
        let beta = result.opt_beta.as_ref().map(|b| b.beta);
        let path = self.path(&result.instance_digest, beta);
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_string_pretty(result)?)?;
        fs::rename(tmp, path)?;
        Ok(())
    }
}

/// [`oracle::solve`] through an optional cache.
pub fn solve_cached(
    cache: Option<&OracleCache>,
    instance: &Instance,
    config: OracleConfig,
    beta: Option<Rational>,
) -> Result<OracleResult> {
    if let Some(cache) = cache {
        if let Some(hit) = cache.get(instance, beta)? {
            return Ok(hit);
        }
    }
    let result = oracle::solve(instance, config, beta)?;
    if let Some(cache) = cache {
        cache.put(&result)?;
    }
    Ok(result)
}

/// Per-colour spans formatted as `c:span` pairs.
pub fn format_spans(spans: &BTreeMap<Colour, usize>) -> String {
    spans
        .iter()
        .map(|(c, s)| format!("{c}:{s}"))
        .collect::<Vec<_>>()
        .join(" ")
}
