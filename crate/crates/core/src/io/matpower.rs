//! Best-effort MATPOWER-style case import covering the bus, branch, gen,
//! gencost, and genfuel tables.
//!
//! Branch reactances become susceptances `baseMVA / x` (MW per radian);
//! a zero RATE_A means no limit, and parallel circuits between a bus pair
//! are merged by summing susceptances and ratings. Fixed bus demand (PD)
//! becomes a one-block bid at the configured value. Polynomial or piecewise
//! generator costs are linearized into at most `blocks_per_generator`
//! monotone offer blocks at equal-capacity knots.

use std::collections::BTreeMap;
use std::path::Path;

use crate::grid::{Bus, Line, Network};
use crate::orderbook::{BidBlock, Generator, Load, OfferBlock, OrderBook};

use super::config::ImportOptions;
use super::IoError;

#[derive(Debug, Default)]
struct RawCase {
    base_mva: f64,
    bus: Vec<(usize, Vec<f64>)>,
    gen: Vec<(usize, Vec<f64>)>,
    branch: Vec<(usize, Vec<f64>)>,
    gencost: Vec<(usize, Vec<f64>)>,
    genfuel: Vec<String>,
    bus_names: Vec<String>,
}

pub fn read_case(path: &Path, options: &ImportOptions) -> Result<(Network, OrderBook), IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_case(&text, &path.display().to_string(), options)
}

pub fn parse_case(
    text: &str,
    path: &str,
    options: &ImportOptions,
) -> Result<(Network, OrderBook), IoError> {
    let raw = scan(text, path)?;
    convert(raw, path, options)
}

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

#[derive(PartialEq, Clone, Copy)]
enum Table {
    Bus,
    Gen,
    Branch,
    Gencost,
}

#[derive(PartialEq, Clone, Copy)]
enum CellTable {
    Genfuel,
    BusName,
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    None,
    Numeric(Table),
    Cell(CellTable),
}

/// Scans the MATLAB-ish source for `mpc.<table> = [...]` numeric blocks and
/// `{...}` cell arrays of strings.
fn scan(text: &str, path: &str) -> Result<RawCase, IoError> {
    let mut raw = RawCase {
        base_mva: 100.0,
        ..Default::default()
    };
    let mut section = Section::None;
    for (idx, rawline) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = rawline.split('%').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match section {
            Section::None => {
                if let Some(rest) = line.strip_prefix("mpc.baseMVA") {
                    let value = rest.trim_start_matches(['=', ' ']).trim_end_matches(';');
                    raw.base_mva = value
                        .trim()
                        .parse()
                        .map_err(|_| parse_err(path, lineno, format!("bad baseMVA `{value}`")))?;
                } else if let Some(table) = line.strip_prefix("mpc.") {
                    let (name, tail) = table.split_once('=').unwrap_or((table, ""));
                    let name = name.trim();
                    let tail = tail.trim();
                    let numeric = match name {
                        "bus" => Some(Table::Bus),
                        "gen" => Some(Table::Gen),
                        "branch" => Some(Table::Branch),
                        "gencost" => Some(Table::Gencost),
                        _ => None,
                    };
                    if let Some(t) = numeric {
                        if let Some(body) = tail.strip_prefix('[') {
                            section = Section::Numeric(t);
                            consume_numeric_rows(&mut raw, t, body, lineno, path, &mut section)?;
                        }
                    } else if let Some(c) = match name {
                        "genfuel" => Some(CellTable::Genfuel),
                        "bus_name" => Some(CellTable::BusName),
                        _ => None,
                    } {
                        if let Some(body) = tail.strip_prefix('{') {
                            section = Section::Cell(c);
                            consume_cell_rows(&mut raw, c, body, &mut section);
                        }
                    }
                }
            }
            Section::Numeric(t) => {
                consume_numeric_rows(&mut raw, t, line, lineno, path, &mut section)?;
            }
            Section::Cell(c) => {
                consume_cell_rows(&mut raw, c, line, &mut section);
            }
        }
    }
    if section != Section::None {
        return Err(parse_err(
            path,
            text.lines().count(),
            "file ends inside an unterminated table",
        ));
    }
    if raw.bus.is_empty() {
        return Err(parse_err(path, 1, "no mpc.bus table found"));
    }
    Ok(raw)
}

fn consume_numeric_rows(
    raw: &mut RawCase,
    table: Table,
    line: &str,
    lineno: usize,
    path: &str,
    section: &mut Section,
) -> Result<(), IoError> {
    let mut body = line;
    if let Some(pos) = body.find(']') {
        body = &body[..pos];
        *section = Section::None;
    }
    for rowtext in body.split(';') {
        let rowtext = rowtext.trim();
        if rowtext.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in rowtext.split_whitespace() {
            let field = field.trim_end_matches(',');
            if field.is_empty() {
                continue;
            }
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("`{field}` is not a number")))?;
            row.push(v);
        }
        if !row.is_empty() {
            match table {
                Table::Bus => raw.bus.push((lineno, row)),
                Table::Gen => raw.gen.push((lineno, row)),
                Table::Branch => raw.branch.push((lineno, row)),
                Table::Gencost => raw.gencost.push((lineno, row)),
            }
        }
    }
    Ok(())
}

fn consume_cell_rows(raw: &mut RawCase, cell: CellTable, line: &str, section: &mut Section) {
    let mut body = line;
    if let Some(pos) = body.find('}') {
        body = &body[..pos];
        *section = Section::None;
    }
    for item in body.split(';') {
        let item = item.trim().trim_matches('\'').trim();
        if !item.is_empty() {
            match cell {
                CellTable::Genfuel => raw.genfuel.push(item.to_string()),
                CellTable::BusName => raw.bus_names.push(item.to_string()),
            }
        }
    }
}

fn convert(
    raw: RawCase,
    path: &str,
    options: &ImportOptions,
) -> Result<(Network, OrderBook), IoError> {
    let mut buses = Vec::new();
    let mut loads = Vec::new();
    let mut reference: Option<String> = None;
    for (lineno, row) in &raw.bus {
        if row.len() < 3 {
            return Err(parse_err(path, *lineno, "bus row needs at least 3 columns"));
        }
        let id = format!("{}", row[0] as i64);
        let bus_type = row[1] as i64;
        let pd = row[2];
        let mut bus = Bus::new(id.clone());
        if let Some(name) = raw.bus_names.get(buses.len()) {
            bus = bus.with_name(name.clone());
        }
        buses.push(bus);
        if bus_type == 3 && reference.is_none() {
            reference = Some(id.clone());
        }
        if pd > 0.0 {
            loads.push(Load::new(
                format!("load{id}"),
                id.clone(),
                vec![BidBlock::new(pd, options.load_bid_value)],
                0.0,
            ));
        }
    }
    let reference =
        reference.unwrap_or_else(|| format!("{}", raw.bus[0].1[0] as i64));

    // Merge in-service parallel circuits per unordered pair.
    let mut merged: BTreeMap<(String, String), (f64, f64)> = BTreeMap::new();
    let mut order: Vec<(String, String)> = Vec::new();
    for (lineno, row) in &raw.branch {
        if row.len() < 6 {
            return Err(parse_err(
                path,
                *lineno,
                "branch row needs at least 6 columns",
            ));
        }
        let status = row.get(10).copied().unwrap_or(1.0);
        if status == 0.0 {
            continue;
        }
        let from = format!("{}", row[0] as i64);
        let to = format!("{}", row[1] as i64);
        let x = row[3];
        if x <= 0.0 {
            return Err(parse_err(
                path,
                *lineno,
                format!("branch {from}-{to} has nonpositive reactance {x}"),
            ));
        }
        let susceptance = raw.base_mva / x;
        let rate_a = row[5];
        let rating = if rate_a > 0.0 { rate_a } else { f64::INFINITY };
        let key = if from <= to {
            (from.clone(), to.clone())
        } else {
            (to.clone(), from.clone())
        };
        let entry = merged.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (0.0, 0.0)
        });
        entry.0 += susceptance;
        entry.1 += rating;
    }
    let lines: Vec<Line> = order
        .into_iter()
        .map(|key| {
            let (b, rating) = merged[&key];
            Line::new(key.0, key.1, b, -rating, rating)
        })
        .collect();

    let mut generators = Vec::new();
    for (i, (lineno, row)) in raw.gen.iter().enumerate() {
        if row.len() < 9 {
            return Err(parse_err(path, *lineno, "gen row needs at least 9 columns"));
        }
        let bus = format!("{}", row[0] as i64);
        let status = row.get(7).copied().unwrap_or(1.0);
        let pmax = row[8];
        if status == 0.0 || pmax <= 0.0 {
            continue;
        }
        let fuel = raw.genfuel.get(i).cloned().ok_or_else(|| {
            if raw.genfuel.is_empty() {
                IoError::Invalid(format!(
                    "`{path}` has no genfuel table; add one or supply class.<fuel> mappings"
                ))
            } else {
                parse_err(path, *lineno, "genfuel table shorter than gen table")
            }
        })?;
        let class = options.class_for_fuel(&fuel).ok_or_else(|| {
            IoError::Invalid(format!(
                "`{path}`: unknown fuel `{fuel}` for generator {i}; map it with class.{fuel}"
            ))
        })?;
        let cost = raw.gencost.get(i).map(|(_, r)| r.as_slice());
        let blocks = cost_to_blocks(cost, pmax, options.blocks_per_generator)
            .map_err(|m| parse_err(path, *lineno, m))?;
        generators.push(Generator::new(
            format!("gen{}_{}", i + 1, bus),
            bus,
            class,
            blocks,
            options.emission_for_fuel(&fuel, class),
        ));
    }
    Ok((
        Network::new(buses, lines, reference),
        OrderBook::new(generators, loads),
    ))
}

/// Linearizes a MATPOWER cost record into at most `k` monotone offer blocks
/// over [0, pmax] at equal-capacity knots; equal-price neighbors merge.
fn cost_to_blocks(cost: Option<&[f64]>, pmax: f64, k: usize) -> Result<Vec<OfferBlock>, String> {
    let k = k.max(1);
    let total_cost: Box<dyn Fn(f64) -> f64> = match cost {
        None => Box::new(|_q| 0.0),
        Some(row) => {
            if row.len() < 4 {
                return Err("gencost row needs at least 4 columns".into());
            }
            let model = row[0] as i64;
            let ncost = row[3] as usize;
            let coeffs = &row[4..];
            if coeffs.len() < ncost.max(1) {
                return Err(format!(
                    "gencost declares {ncost} entries but provides {}",
                    coeffs.len()
                ));
            }
            match model {
                // Polynomial: c_{n-1} q^{n-1} + ... + c1 q + c0.
                2 => {
                    let poly: Vec<f64> = coeffs[..ncost].to_vec();
                    Box::new(move |q| {
                        poly.iter().fold(0.0, |acc, &c| acc * q + c)
                    })
                }
                // Piecewise linear through (x1,y1)..(xn,yn).
                1 => {
                    let pts: Vec<(f64, f64)> = coeffs[..2 * ncost]
                        .chunks(2)
                        .map(|c| (c[0], c[1]))
                        .collect();
                    if pts.len() < 2 {
                        return Err("piecewise cost needs at least two points".into());
                    }
                    Box::new(move |q| {
                        // Clamp outside the sampled range, interpolate inside.
                        if q <= pts[0].0 {
                            return pts[0].1;
                        }
                        for w in pts.windows(2) {
                            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
                            if q <= x1 {
                                if x1 == x0 {
                                    return y1;
                                }
                                return y0 + (y1 - y0) * (q - x0) / (x1 - x0);
                            }
                        }
                        let ((x0, y0), (x1, y1)) =
                            (pts[pts.len() - 2], pts[pts.len() - 1]);
                        y1 + (y1 - y0) / (x1 - x0) * (q - x1)
                    })
                }
                other => return Err(format!("unsupported gencost model {other}")),
            }
        }
    };
    let width = pmax / k as f64;
    let mut blocks: Vec<OfferBlock> = Vec::with_capacity(k);
    let mut prev_price = f64::NEG_INFINITY;
    for j in 0..k {
        let q0 = width * j as f64;
        let q1 = if j + 1 == k { pmax } else { width * (j + 1) as f64 };
        let incremental = (total_cost(q1) - total_cost(q0)) / (q1 - q0);
        // Monotonize: a valid offer cannot undercut its earlier blocks.
        let price = incremental.max(prev_price);
        prev_price = price;
        match blocks.last_mut() {
            Some(last) if last.price == price => last.quantity_max += q1 - q0,
            _ => blocks.push(OfferBlock::new(q1 - q0, price)),
        }
    }
    Ok(blocks)
}
