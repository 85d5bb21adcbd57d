//! Versioned JSON documents for every domain type.
//!
//! Each top-level document carries `"version": 1`; nested objects do not.
//! Rationals are `"p/q"` strings, floats use shortest round-trip decimals,
//! complex entries are `[re, im]` pairs.

use crate::algebra::{AlgebraShape, BlockElement, CMatrix, C64};
use crate::error::{Error, Result};
use crate::metrics::{EffrosShenFamily, IsometryMap, MetricCertificate};
use crate::seminorms::{LipKind, LipSpec, WeightSequence};
use crate::states::TraceWeights;
use crate::towers::{ContinuedFraction, Tower};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// Largest `Σ n(k)²` accepted for a parsed Lip-norm spec.
pub const MAX_SPEC_DIMENSION: usize = 1 << 12;

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Parses a document, checks its version tag and strips it.
fn read_doc<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    let mut v: Value = serde_json::from_slice(bytes).map_err(parse_err)?;
    let obj = v.as_object_mut().ok_or_else(|| Error::Parse("document is not a JSON object".into()))?;
    match obj.remove("version") {
        Some(Value::Number(n)) if n.as_u64() == Some(u64::from(SCHEMA_VERSION)) => {}
        Some(other) => return Err(Error::Schema { expected: SCHEMA_VERSION, found: other.to_string() }),
        None => return Err(Error::Schema { expected: SCHEMA_VERSION, found: "missing".into() }),
    }
    serde_json::from_value(v).map_err(parse_err)
}

/// Serializes with the version tag added.
fn write_doc<T: Serialize>(dto: &T) -> Result<String> {
    let mut v = serde_json::to_value(dto).map_err(parse_err)?;
    if let Some(obj) = v.as_object_mut() {
        obj.insert("version".into(), Value::from(SCHEMA_VERSION));
    }
    serde_json::to_string_pretty(&v).map_err(parse_err)
}

pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("{text:?} is not a rational of the form p/q"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let int = |s: &str, signed: bool| -> Result<BigInt> {
        let digits = if signed { s.strip_prefix('-').unwrap_or(s) } else { s };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        s.parse().map_err(|_| bad())
    };
    let p = int(num, true)?;
    let q = match den {
        Some(d) => int(d, false)?,
        None => BigInt::from(1),
    };
    if q.is_zero() {
        return Err(Error::Parse(format!("{text:?} has a zero denominator")));
    }
    Ok(BigRational::new(p, q))
}

/// Comma-separated partial quotients, e.g. `0,1,1,2`.
pub fn parse_quotients(text: &str) -> Result<ContinuedFraction> {
    ContinuedFraction::parse(text)
}

// ---- elements ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementDto {
    shape: Vec<usize>,
    blocks: Vec<Vec<Vec<[f64; 2]>>>,
}

fn element_to_dto(x: &BlockElement) -> ElementDto {
    ElementDto {
        shape: x.shape().dims().to_vec(),
        blocks: x
            .blocks()
            .iter()
            .map(|b| (0..b.dim()).map(|r| b.row(r).iter().map(|z| [z.re, z.im]).collect()).collect())
            .collect(),
    }
}

fn element_from_dto(d: ElementDto) -> Result<BlockElement> {
    let shape = AlgebraShape::new(d.shape)?;
    if d.blocks.len() != shape.num_blocks() {
        return Err(Error::Shape(format!("{} blocks for a shape with {}", d.blocks.len(), shape.num_blocks())));
    }
    let mut blocks = Vec::with_capacity(d.blocks.len());
    for (k, rows) in d.blocks.into_iter().enumerate() {
        let n = shape.block(k);
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(format!("block {k} is not {n}x{n}")));
        }
        let data: Vec<C64> = rows.into_iter().flatten().map(|[re, im]| C64::new(re, im)).collect();
        blocks.push(CMatrix::from_vec(n, data).ok_or_else(|| Error::Shape(format!("block {k} has the wrong size")))?);
    }
    let x = BlockElement::new(shape, blocks)?;
    if !x.all_finite() {
        return Err(Error::Domain("element has non-finite entries".into()));
    }
    Ok(x)
}

pub fn element_to_json(x: &BlockElement) -> Result<String> {
    write_doc(&element_to_dto(x))
}

pub fn parse_element(bytes: &[u8]) -> Result<BlockElement> {
    element_from_dto(read_doc(bytes)?)
}

// ---- towers ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TowerDto {
    levels: Vec<Vec<usize>>,
    steps: Vec<Vec<Vec<usize>>>,
    label: String,
}

fn tower_to_dto(t: &Tower) -> TowerDto {
    TowerDto { levels: t.levels().iter().map(|s| s.dims().to_vec()).collect(), steps: t.step_matrices(), label: t.label().to_string() }
}

fn tower_from_dto(d: TowerDto) -> Result<Tower> {
    let levels = d.levels.into_iter().map(AlgebraShape::new).collect::<Result<Vec<_>>>()?;
    Tower::new(levels, d.steps, d.label)
}

pub fn tower_to_json(t: &Tower) -> Result<String> {
    write_doc(&tower_to_dto(t))
}

pub fn parse_tower(bytes: &[u8]) -> Result<Tower> {
    tower_from_dto(read_doc(bytes)?)
}

// ---- traces ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceDto {
    shape: Vec<usize>,
    lambda: Vec<f64>,
}

fn trace_to_dto(w: &TraceWeights) -> TraceDto {
    TraceDto { shape: w.shape().dims().to_vec(), lambda: w.lambda().to_vec() }
}

fn trace_from_dto(d: TraceDto) -> Result<TraceWeights> {
    TraceWeights::new(AlgebraShape::new(d.shape)?, d.lambda)
}

pub fn trace_to_json(w: &TraceWeights) -> Result<String> {
    write_doc(&trace_to_dto(w))
}

pub fn parse_trace(bytes: &[u8]) -> Result<TraceWeights> {
    trace_from_dto(read_doc(bytes)?)
}

// ---- Lip-norm specs ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDto {
    tower: TowerDto,
    kind: String,
    #[serde(default)]
    trace: Option<TraceDto>,
    beta: Vec<String>,
    #[serde(default)]
    dominator: Option<Vec<String>>,
}

pub fn lipspec_to_json(spec: &LipSpec) -> Result<String> {
    let dto = SpecDto {
        tower: tower_to_dto(spec.tower()),
        kind: spec.kind().as_str().to_string(),
        trace: spec.trace().map(trace_to_dto),
        beta: spec.beta().beta().iter().map(ToString::to_string).collect(),
        dominator: spec.beta().dominator().map(|d| d.iter().map(ToString::to_string).collect()),
    };
    write_doc(&dto)
}

pub fn parse_lipspec(bytes: &[u8]) -> Result<LipSpec> {
    let d: SpecDto = read_doc(bytes)?;
    let kind = match d.kind.as_str() {
        "cond-exp" => LipKind::CondExp,
        "quotient" => LipKind::Quotient,
        other => return Err(Error::Parse(format!("unknown Lip-norm kind {other:?}"))),
    };
    let tower = tower_from_dto(d.tower)?;
    let dim = tower.top().dims().iter().try_fold(0usize, |acc, &n| n.checked_mul(n).and_then(|s| acc.checked_add(s)));
    if dim.is_none_or(|d| d > MAX_SPEC_DIMENSION) {
        return Err(Error::Config(format!("top level is larger than {MAX_SPEC_DIMENSION} entries")));
    }
    let trace = d.trace.map(trace_from_dto).transpose()?;
    let beta = WeightSequence::new(d.beta.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?)?;
    let beta = match d.dominator {
        Some(dom) => beta.with_dominator(dom.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?)?,
        None => beta,
    };
    LipSpec::build(tower, kind, trace, beta)
}

// ---- certificates ----

pub fn certificate_to_json(c: &MetricCertificate) -> Result<String> {
    write_doc(c)
}

/// Parses a certificate and rejects it if its `verified` flag disagrees
/// with its own witnesses.
pub fn parse_certificate(bytes: &[u8]) -> Result<MetricCertificate> {
    let c: MetricCertificate = read_doc(bytes)?;
    if c.verified != c.recheck() {
        return Err(Error::Domain("certificate flag disagrees with its witnesses".into()));
    }
    Ok(c)
}

// ---- families ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyDto {
    limit: Vec<u64>,
    members: Vec<Vec<u64>>,
}

pub fn family_to_json(f: &EffrosShenFamily) -> Result<String> {
    write_doc(&FamilyDto { limit: f.limit.quotients().to_vec(), members: f.members.iter().map(|m| m.quotients().to_vec()).collect() })
}

pub fn parse_family(bytes: &[u8]) -> Result<EffrosShenFamily> {
    let d: FamilyDto = read_doc(bytes)?;
    let members = d.members.into_iter().map(ContinuedFraction::new).collect::<Result<_>>()?;
    EffrosShenFamily::new(ContinuedFraction::new(d.limit)?, members)
}

// ---- isometry maps ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapDto {
    level_perms: Vec<Vec<usize>>,
    #[serde(default)]
    top_unitaries: Option<Vec<Vec<Vec<[f64; 2]>>>>,
}

pub fn isometry_map_to_json(m: &IsometryMap) -> Result<String> {
    let top_unitaries = m
        .top_unitaries
        .as_ref()
        .map(|us| us.iter().map(|u| (0..u.dim()).map(|r| u.row(r).iter().map(|z| [z.re, z.im]).collect()).collect()).collect());
    write_doc(&MapDto { level_perms: m.level_perms.clone(), top_unitaries })
}

pub fn parse_isometry_map(bytes: &[u8]) -> Result<IsometryMap> {
    let d: MapDto = read_doc(bytes)?;
    let top_unitaries = d
        .top_unitaries
        .map(|us| {
            us.into_iter()
                .enumerate()
                .map(|(j, rows)| {
                    let n = rows.len();
                    if rows.iter().any(|r| r.len() != n) {
                        return Err(Error::Shape(format!("unitary {j} is not square")));
                    }
                    let data = rows.into_iter().flatten().map(|[re, im]| C64::new(re, im)).collect();
                    CMatrix::from_vec(n, data).ok_or_else(|| Error::Shape(format!("unitary {j} has the wrong size")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    Ok(IsometryMap { level_perms: d.level_perms, top_unitaries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    #[test]
    fn tower_round_trip() {
        let t = Tower::effros_shen(&ContinuedFraction::golden(5), 4).unwrap();
        let json = tower_to_json(&t).unwrap();
        assert_eq!(parse_tower(json.as_bytes()).unwrap(), t);
        assert!(json.contains("\"version\": 1"));
    }

    #[test]
    fn rational_round_trip() {
        let r = parse_rational("1/13").unwrap();
        assert_eq!(r.to_string(), "1/13");
        assert_eq!(parse_rational("4/2").unwrap().to_string(), "2");
        for bad in ["", "1/0", "a/2", "1/-2", "--1", "1/", "/3", " 1/2"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn element_round_trip_is_bit_exact() {
        let shape = AlgebraShape::new(vec![2, 1, 3]).unwrap();
        let x = BlockElement::random(&shape, &mut random::rng(8)).scale_re(1.0 / 3.0);
        let back = parse_element(element_to_json(&x).unwrap().as_bytes()).unwrap();
        for (a, b) in x.blocks().iter().zip(back.blocks()) {
            for (u, v) in a.as_slice().iter().zip(b.as_slice()) {
                assert_eq!(u.re.to_bits(), v.re.to_bits());
                assert_eq!(u.im.to_bits(), v.im.to_bits());
            }
        }
    }

    #[test]
    fn version_is_required() {
        let t = Tower::uhf(&[2], 1).unwrap();
        let json = tower_to_json(&t).unwrap();
        let stripped = json.replace("\"version\": 1", "\"version\": 2");
        assert!(matches!(parse_tower(stripped.as_bytes()), Err(Error::Schema { .. })));
        assert!(matches!(parse_tower(br#"{"levels":[[1]],"steps":[],"label":""}"#), Err(Error::Schema { .. })));
    }

    #[test]
    fn spec_round_trip() {
        let cf = ContinuedFraction::golden(30);
        let spec = EffrosShenFamily::spec(&cf, 3).unwrap();
        let back = parse_lipspec(lipspec_to_json(&spec).unwrap().as_bytes()).unwrap();
        assert_eq!(back.tower(), spec.tower());
        assert_eq!(back.trace(), spec.trace());
        assert_eq!(back.beta(), spec.beta());
        assert_eq!(back.kind(), spec.kind());
    }
}
