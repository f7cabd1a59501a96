//! JSON encodings of the domain types and canonical (sorted-key) rendering
//! for bit-identical reports. Rationals serialize as `"p/q"` (or `"p"`),
//! RElements as arrays of such strings indexed by the power of t; no floats
//! appear anywhere.

use num_traits::Zero;
use serde_json::{json, Map, Value};
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use crate::coefficients::{rational_from_str, rational_to_string, ArtinRing, RElement, Rational};
use crate::descent::{build_nerve, Cover, DescentDatum, FiniteSpace, NervePoint, SheafData};
use crate::dgla::{Dgla, DglaElement};
use crate::error::CoreError;
use crate::gmat::{GElt, GMat};
use crate::hochschild::{FinAlgebra, HochschildCochain, StarProduct};
use crate::linalg::Mat;
use crate::simplicial::{CosimplicialVS, DeltaSimplex, MonotoneMap};
use crate::stacks::GStack;

/// Render any JSON value with recursively sorted object keys.
pub fn canonical_string(v: &Value) -> String {
    fn write(v: &Value, out: &mut String) {
        match v {
            Value::Object(map) => {
                let mut keys: Vec<&String> = map.keys().collect();
                keys.sort();
                out.push('{');
                for (i, k) in keys.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&Value::String((*k).clone()).to_string());
                    out.push(':');
                    write(&map[*k], out);
                }
                out.push('}');
            }
            Value::Array(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write(item, out);
                }
                out.push(']');
            }
            other => out.push_str(&other.to_string()),
        }
    }
    let mut s = String::new();
    write(v, &mut s);
    s
}

pub fn rational_json(r: &Rational) -> Value {
    Value::String(rational_to_string(r))
}

pub fn rational_from_json(v: &Value) -> Result<Rational, CoreError> {
    match v {
        Value::String(s) => rational_from_str(s),
        Value::Number(n) => {
            let s = n.to_string();
            if s.contains('.') {
                return Err(CoreError::Parse(
                    "floats are not accepted; use \"p/q\"".into(),
                ));
            }
            rational_from_str(&s)
        }
        _ => Err(CoreError::Parse("expected rational string".into())),
    }
}

pub fn relement_json(e: &RElement) -> Value {
    Value::Array(e.to_strings().into_iter().map(Value::String).collect())
}

pub fn relement_from_json(ring: ArtinRing, v: &Value) -> Result<RElement, CoreError> {
    match v {
        Value::Array(items) => {
            let parts: Result<Vec<String>, CoreError> = items
                .iter()
                .map(|x| match x {
                    Value::String(s) => Ok(s.clone()),
                    Value::Number(n) => Ok(n.to_string()),
                    _ => Err(CoreError::Parse("RElement entries are strings".into())),
                })
                .collect();
            RElement::from_strings(ring, &parts?)
        }
        Value::String(s) => RElement::from_strings(ring, std::slice::from_ref(&s.clone())),
        Value::Number(n) => RElement::from_strings(ring, &[n.to_string()]),
        _ => Err(CoreError::Parse("expected RElement array".into())),
    }
}

fn as_usize(v: &Value, what: &str) -> Result<usize, CoreError> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| CoreError::Parse(format!("expected integer for {what}")))
}

// ---------------------------------------------------------------------------
// Dgla
// ---------------------------------------------------------------------------

pub fn dgla_from_json(v: &Value, ring: ArtinRing) -> Result<Dgla, CoreError> {
    let degrees = v
        .get("degrees")
        .and_then(|d| d.as_object())
        .ok_or_else(|| CoreError::Parse("dgla needs a degrees object".into()))?;
    let mut dims = BTreeMap::new();
    for (k, dim) in degrees {
        let deg: i64 = k
            .parse()
            .map_err(|_| CoreError::Parse(format!("bad degree key {k}")))?;
        dims.insert(deg, as_usize(dim, "degree dimension")?);
    }
    let mut g = Dgla::new(ring, dims)?;
    if let Some(blocks) = v.get("differential").and_then(|d| d.as_array()) {
        for block in blocks {
            let deg = block
                .get("deg")
                .and_then(|d| d.as_i64())
                .ok_or_else(|| CoreError::Parse("differential block needs deg".into()))?;
            let rows = block
                .get("matrix")
                .and_then(|m| m.as_array())
                .ok_or_else(|| CoreError::Parse("differential block needs matrix".into()))?;
            let mut mat_rows = Vec::new();
            for row in rows {
                let row = row
                    .as_array()
                    .ok_or_else(|| CoreError::Parse("matrix row".into()))?;
                let parsed: Result<Vec<Rational>, CoreError> =
                    row.iter().map(rational_from_json).collect();
                mat_rows.push(parsed?);
            }
            let m = if mat_rows.is_empty() {
                Mat::zeros(g.dim(deg + 1), g.dim(deg))
            } else {
                Mat::from_rows(mat_rows)
            };
            g.set_diff_block(deg, m)?;
        }
    }
    if let Some(entries) = v.get("bracket").and_then(|b| b.as_array()) {
        for e in entries {
            let deg_a = e
                .get("deg_a")
                .and_then(|x| x.as_i64())
                .ok_or_else(|| CoreError::Parse("bracket entry needs deg_a".into()))?;
            let deg_b = e
                .get("deg_b")
                .and_then(|x| x.as_i64())
                .ok_or_else(|| CoreError::Parse("bracket entry needs deg_b".into()))?;
            let i = as_usize(e.get("i").unwrap_or(&Value::Null), "bracket i")?;
            let j = as_usize(e.get("j").unwrap_or(&Value::Null), "bracket j")?;
            let k = as_usize(e.get("k").unwrap_or(&Value::Null), "bracket k")?;
            let c = rational_from_json(e.get("c").unwrap_or(&Value::Null))?;
            g.set_bracket(deg_a, deg_b, i, j, k, c)?;
        }
    }
    Ok(g)
}

pub fn dgla_element_from_json(g: &Dgla, v: &Value) -> Result<DglaElement, CoreError> {
    let degree = v
        .get("degree")
        .and_then(|d| d.as_i64())
        .ok_or_else(|| CoreError::Parse("element needs degree".into()))?;
    let coeffs = v
        .get("coeffs")
        .and_then(|c| c.as_array())
        .ok_or_else(|| CoreError::Parse("element needs coeffs".into()))?;
    let parsed: Result<Vec<RElement>, CoreError> = coeffs
        .iter()
        .map(|c| relement_from_json(g.ring_of(), c))
        .collect();
    g.element(degree, parsed?)
}

pub fn dgla_element_json(e: &DglaElement) -> Value {
    json!({
        "degree": e.degree,
        "coeffs": e.coeffs.iter().map(relement_json).collect::<Vec<_>>(),
    })
}

impl Dgla {
    pub fn ring_of(&self) -> ArtinRing {
        use crate::dgla::Gla;
        self.ring()
    }
}

// ---------------------------------------------------------------------------
// Algebras and star products
// ---------------------------------------------------------------------------

pub fn algebra_from_json(v: &Value) -> Result<FinAlgebra, CoreError> {
    let dim = as_usize(v.get("dim").unwrap_or(&Value::Null), "algebra dim")?;
    if let Some(unit) = v.get("unit").and_then(|u| u.as_array()) {
        // optional sanity: unit must be e0
        let parsed: Result<Vec<Rational>, CoreError> =
            unit.iter().map(rational_from_json).collect();
        let parsed = parsed?;
        let ok = parsed.len() == dim
            && parsed.iter().enumerate().all(|(i, c)| {
                if i == 0 {
                    c == &Rational::from_integer(1.into())
                } else {
                    c.is_zero()
                }
            });
        if !ok {
            return Err(CoreError::Invalid(
                "unit must be the basis vector e_0".into(),
            ));
        }
    }
    let mult = v
        .get("mult")
        .and_then(|m| m.as_array())
        .ok_or_else(|| CoreError::Parse("algebra needs mult".into()))?;
    let mut table = Vec::new();
    for row in mult {
        let row = row
            .as_array()
            .ok_or_else(|| CoreError::Parse("mult row".into()))?;
        let mut trow = Vec::new();
        for cell in row {
            let cell = cell
                .as_array()
                .ok_or_else(|| CoreError::Parse("mult cell".into()))?;
            let parsed: Result<Vec<Rational>, CoreError> =
                cell.iter().map(rational_from_json).collect();
            trow.push(parsed?);
        }
        table.push(trow);
    }
    FinAlgebra::new(dim, table)
}

pub fn algebra_json(a: &FinAlgebra) -> Value {
    let dim = a.dim();
    let mut unit = vec![Value::String("0".into()); dim];
    unit[0] = Value::String("1".into());
    let mult: Vec<Value> = (0..dim)
        .map(|i| {
            Value::Array(
                (0..dim)
                    .map(|j| Value::Array(a.basis_mul(i, j).iter().map(rational_json).collect()))
                    .collect(),
            )
        })
        .collect();
    json!({"dim": dim, "unit": unit, "mult": mult})
}

/// Star product JSON: algebra fields plus `N` and per-order corrections
/// (arity-2 rational tensors, `corrections[r-1]` the coefficient of `t^r`).
pub fn star_from_json(v: &Value) -> Result<StarProduct, CoreError> {
    let algebra = algebra_from_json(v)?;
    let n = as_usize(v.get("N").unwrap_or(&Value::Null), "N")?;
    let ring = ArtinRing::new(n)?;
    let d = algebra.dim();
    let mut corrections = Vec::new();
    let raw = v
        .get("corrections")
        .and_then(|c| c.as_array())
        .ok_or_else(|| CoreError::Parse("star product needs corrections".into()))?;
    for tensor in raw {
        let rows = tensor
            .as_array()
            .ok_or_else(|| CoreError::Parse("correction tensor".into()))?;
        let mut b = HochschildCochain::zero(ring, d, 2);
        for (i, row) in rows.iter().enumerate() {
            let row = row
                .as_array()
                .ok_or_else(|| CoreError::Parse("correction row".into()))?;
            for (j, cell) in row.iter().enumerate() {
                let cell = cell
                    .as_array()
                    .ok_or_else(|| CoreError::Parse("correction cell".into()))?;
                for (k, c) in cell.iter().enumerate() {
                    let c = rational_from_json(c)?;
                    if !c.is_zero() {
                        b.set(&[i, j], k, ring.from_rational(c));
                    }
                }
            }
        }
        corrections.push(b);
    }
    StarProduct::new(algebra, ring, corrections)
}

// ---------------------------------------------------------------------------
// Cosimplicial vector spaces
// ---------------------------------------------------------------------------

pub fn cosimplicial_from_json(v: &Value) -> Result<CosimplicialVS, CoreError> {
    let dims_v = v
        .get("dims")
        .and_then(|d| d.as_array())
        .ok_or_else(|| CoreError::Parse("cosimplicial needs dims".into()))?;
    let dims: Result<Vec<usize>, CoreError> =
        dims_v.iter().map(|d| as_usize(d, "dims entry")).collect();
    let dims = dims?;
    let parse_mats = |key: &str,
                      counts: &dyn Fn(usize) -> usize,
                      rows: &dyn Fn(usize) -> usize,
                      cols: &dyn Fn(usize) -> usize|
     -> Result<Vec<Vec<Mat>>, CoreError> {
        let arr = v
            .get(key)
            .and_then(|c| c.as_array())
            .ok_or_else(|| CoreError::Parse(format!("cosimplicial needs {key}")))?;
        let mut out = Vec::new();
        for (level, group) in arr.iter().enumerate() {
            let group = group
                .as_array()
                .ok_or_else(|| CoreError::Parse(format!("{key}[{level}]")))?;
            if group.len() != counts(level) {
                return Err(CoreError::Parse(format!(
                    "{key}[{level}] needs {} matrices",
                    counts(level)
                )));
            }
            let mut mats = Vec::new();
            for m in group {
                let m = m
                    .as_array()
                    .ok_or_else(|| CoreError::Parse("matrix".into()))?;
                let mut mat = Mat::zeros(rows(level), cols(level));
                for (r, row) in m.iter().enumerate() {
                    let row = row
                        .as_array()
                        .ok_or_else(|| CoreError::Parse("matrix row".into()))?;
                    for (c, cell) in row.iter().enumerate() {
                        *mat.at_mut(r, c) = rational_from_json(cell)?;
                    }
                }
                mats.push(mat);
            }
            out.push(mats);
        }
        Ok(out)
    };
    let d2 = dims.clone();
    let d3 = dims.clone();
    let cofaces = parse_mats("cofaces", &|n| n + 2, &move |n| d2[n + 1], &move |n| d3[n])?;
    let d4 = dims.clone();
    let d5 = dims.clone();
    let codegens = parse_mats("codegeneracies", &|n| n + 1, &move |n| d4[n], &move |n| {
        d5[n + 1]
    })?;
    CosimplicialVS::from_generators(dims, cofaces, codegens)
}

// ---------------------------------------------------------------------------
// Spaces, covers, descent data
// ---------------------------------------------------------------------------

pub fn space_cover_from_json(v: &Value) -> Result<Rc<Cover>, CoreError> {
    let points = v
        .get("points")
        .and_then(|p| p.as_array())
        .ok_or_else(|| CoreError::Parse("space needs points".into()))?;
    let names: Result<Vec<String>, CoreError> = points
        .iter()
        .map(|p| {
            p.as_str()
                .map(str::to_string)
                .ok_or_else(|| CoreError::Parse("point names are strings".into()))
        })
        .collect();
    let names = names?;
    let index = |s: &str| -> Result<usize, CoreError> {
        names
            .iter()
            .position(|n| n == s)
            .ok_or_else(|| CoreError::Parse(format!("unknown point {s}")))
    };
    let mut relations = Vec::new();
    if let Some(order) = v.get("order").and_then(|o| o.as_array()) {
        for pair in order {
            let pair = pair
                .as_array()
                .ok_or_else(|| CoreError::Parse("order entries are pairs".into()))?;
            if pair.len() != 2 {
                return Err(CoreError::Parse("order entries are pairs".into()));
            }
            let a = index(pair[0].as_str().unwrap_or_default())?;
            let b = index(pair[1].as_str().unwrap_or_default())?;
            relations.push((a, b));
        }
    }
    let space = Rc::new(FiniteSpace::new(names.clone(), &relations)?);
    let cover_v = v
        .get("cover")
        .and_then(|c| c.as_array())
        .ok_or_else(|| CoreError::Parse("input needs a cover".into()))?;
    let mut members = Vec::new();
    for m in cover_v {
        let m = m
            .as_array()
            .ok_or_else(|| CoreError::Parse("cover member".into()))?;
        let mut set = std::collections::BTreeSet::new();
        for p in m {
            set.insert(index(p.as_str().unwrap_or_default())?);
        }
        members.push(set);
    }
    Ok(Rc::new(Cover::new(space, members)?))
}

fn nerve_key_parse(cover: &Cover, key: &str) -> Result<NervePoint, CoreError> {
    let (name, idx) = key
        .split_once('|')
        .ok_or_else(|| CoreError::Parse(format!("bad nerve key {key}")))?;
    let point = (0..cover.space.len())
        .find(|&i| cover.space.name(i) == name)
        .ok_or_else(|| CoreError::Parse(format!("unknown point {name}")))?;
    let indices: Result<Vec<usize>, CoreError> = idx
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CoreError::Parse(format!("bad chart index in {key}")))
        })
        .collect();
    Ok(NervePoint {
        point,
        indices: indices?,
    })
}

/// DescentDatum JSON: the space/cover fields plus `N`, optional `fiber`
/// (FinAlgebra), `a012` (required map), optional `a01`, optional `unit`
/// (derived from `a012(iii)^{-1}` when missing).
pub fn descent_datum_from_json(v: &Value) -> Result<Rc<DescentDatum>, CoreError> {
    let cover = space_cover_from_json(v)?;
    let n = as_usize(v.get("N").unwrap_or(&Value::Null), "N")?;
    let ring = ArtinRing::new(n)?;
    let fiber = match v.get("fiber") {
        Some(f) => algebra_from_json(f)?,
        None => FinAlgebra::rationals(),
    };
    let parse_map =
        |key: &str, level: usize| -> Result<Option<HashMap<NervePoint, RElement>>, CoreError> {
            let Some(obj) = v.get(key) else {
                return Ok(None);
            };
            let obj = obj
                .as_object()
                .ok_or_else(|| CoreError::Parse(format!("{key} is a map")))?;
            let mut out = HashMap::new();
            for (k, val) in obj {
                let np = nerve_key_parse(&cover, k)?;
                if np.indices.len() != level + 1 {
                    return Err(CoreError::Parse(format!(
                        "{key} key {k} has wrong arity for nerve level {level}"
                    )));
                }
                out.insert(np, relement_from_json(ring, val)?);
            }
            Ok(Some(out))
        };
    let a012 = parse_map("a012", 2)?;
    let datum = match a012 {
        None => DescentDatum::trivial(cover.clone(), ring, fiber),
        Some(mut map) => {
            // fill unspecified entries with 1
            for np in build_nerve(&cover, 2) {
                map.entry(np).or_insert_with(|| ring.one());
            }
            let mut d = DescentDatum::from_cocycle(cover.clone(), ring, fiber, map)?;
            if let Some(a01) = parse_map("a01", 1)? {
                for (k, val) in a01 {
                    d.a01.insert(k, val);
                }
            }
            if let Some(unit) = parse_map("unit", 0)? {
                for (k, val) in unit {
                    d.unit.insert(k, val);
                }
            }
            d
        }
    };
    Ok(Rc::new(datum))
}

pub fn descent_datum_json(d: &DescentDatum) -> Value {
    let space = &d.cover.space;
    let points: Vec<Value> = (0..space.len())
        .map(|i| Value::String(space.name(i).to_string()))
        .collect();
    let mut order = Vec::new();
    for a in 0..space.len() {
        for b in 0..space.len() {
            if a != b && space.leq(a, b) {
                order.push(json!([space.name(a), space.name(b)]));
            }
        }
    }
    let cover: Vec<Value> = d
        .cover
        .members
        .iter()
        .map(|m| {
            Value::Array(
                m.iter()
                    .map(|&p| Value::String(space.name(p).into()))
                    .collect(),
            )
        })
        .collect();
    let map_json = |m: &HashMap<NervePoint, RElement>| -> Value {
        let mut obj = Map::new();
        let mut keys: Vec<(&NervePoint, &RElement)> = m.iter().collect();
        keys.sort_by_key(|(np, _)| (*np).clone());
        for (np, val) in keys {
            obj.insert(np.key(space), relement_json(val));
        }
        Value::Object(obj)
    };
    json!({
        "points": points,
        "order": order,
        "cover": cover,
        "N": d.ring.order(),
        "fiber": algebra_json(&d.fiber),
        "a01": map_json(&d.a01),
        "a012": map_json(&d.a012),
        "unit": map_json(&d.unit),
    })
}

pub fn sheaf_from_json(space: &FiniteSpace, v: Option<&Value>) -> Result<SheafData, CoreError> {
    match v {
        None => Ok(SheafData::constant(space, 1)),
        Some(Value::Number(n)) => {
            let d = n
                .as_u64()
                .ok_or_else(|| CoreError::Parse("sheaf dim".into()))? as usize;
            Ok(SheafData::constant(space, d))
        }
        Some(_) => Err(CoreError::Parse(
            "sheaf field must be a constant stalk dimension".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// G-stacks
// ---------------------------------------------------------------------------

pub fn lambda_key(lambda: &DeltaSimplex) -> String {
    let objects = lambda
        .objects
        .iter()
        .map(|o| o.to_string())
        .collect::<Vec<_>>()
        .join("-");
    let arrows = lambda
        .arrows
        .iter()
        .map(|a| {
            a.values
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("|");
    if arrows.is_empty() {
        objects
    } else {
        format!("{objects}:{arrows}")
    }
}

fn lambda_from_key(key: &str) -> Result<DeltaSimplex, CoreError> {
    let (objs, arrs) = match key.split_once(':') {
        Some((o, a)) => (o, Some(a)),
        None => (key, None),
    };
    let objects: Result<Vec<usize>, CoreError> = objs
        .split('-')
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| CoreError::Parse(format!("bad λ key {key}")))
        })
        .collect();
    let objects = objects?;
    let mut arrows = Vec::new();
    if let Some(arrs) = arrs {
        for (i, a) in arrs.split('|').enumerate() {
            let values: Result<Vec<usize>, CoreError> = a
                .split(',')
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|_| CoreError::Parse(format!("bad λ key {key}")))
                })
                .collect();
            arrows.push(MonotoneMap::new(objects[i], objects[i + 1], values?)?);
        }
    }
    DeltaSimplex::new(objects, arrows)
}

pub fn gelt_json(g: &GMat, e: &GElt) -> Value {
    let mut comps = Map::new();
    for (li, sec) in e.comps.iter().enumerate() {
        if sec.is_zero() {
            continue;
        }
        let key = lambda_key(&g.lambda_info(e.level, li).lambda);
        comps.insert(
            key,
            Value::Array(sec.entries().iter().map(relement_json).collect()),
        );
    }
    json!({
        "level": e.level,
        "degree": e.degree,
        "components": Value::Object(comps),
    })
}

pub fn gelt_from_json(g: &GMat, v: &Value) -> Result<GElt, CoreError> {
    let level = as_usize(v.get("level").unwrap_or(&Value::Null), "level")?;
    let degree = v
        .get("degree")
        .and_then(|d| d.as_i64())
        .ok_or_else(|| CoreError::Parse("gelt needs degree".into()))?;
    let mut out = g.zero_elt(level, degree);
    if let Some(obj) = v.get("components").and_then(|c| c.as_object()) {
        for (k, entries) in obj {
            let lambda = lambda_from_key(k)?;
            let li = *g
                .lambda_index_lookup(level, &lambda)
                .ok_or_else(|| CoreError::Parse(format!("λ {k} outside caps")))?;
            let entries = entries
                .as_array()
                .ok_or_else(|| CoreError::Parse("component entries".into()))?;
            let sec = &mut out.comps[li];
            if entries.len() != sec.entries().len() {
                return Err(CoreError::Parse(format!(
                    "component {k} has {} entries, expected {}",
                    entries.len(),
                    sec.entries().len()
                )));
            }
            for (slot, val) in entries.iter().enumerate() {
                sec.entries_mut()[slot] = relement_from_json(g.ring(), val)?;
            }
        }
    }
    Ok(out)
}

impl GMat {
    pub fn lambda_index_lookup(&self, level: usize, lambda: &DeltaSimplex) -> Option<&usize> {
        self.lambda_index_ref(level).get(lambda)
    }
}

pub fn gstack_json(g: &GMat, s: &GStack) -> Value {
    json!({
        "gamma0": gelt_json(g, &s.gamma0),
        "gamma1": gelt_json(g, &s.gamma1),
        "gamma2": gelt_json(g, &s.gamma2),
    })
}

pub fn gstack_from_json(g: &GMat, v: &Value) -> Result<GStack, CoreError> {
    Ok(GStack {
        gamma0: gelt_from_json(g, v.get("gamma0").unwrap_or(&Value::Null))?,
        gamma1: gelt_from_json(g, v.get("gamma1").unwrap_or(&Value::Null))?,
        gamma2: gelt_from_json(g, v.get("gamma2").unwrap_or(&Value::Null))?,
    })
}
