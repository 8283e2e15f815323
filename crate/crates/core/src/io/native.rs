//! Native case format: a TOML document with `[case]`, `[[bus]]`, `[[line]]`,
//! `[[generator]]`, and `[[load]]` tables.
//!
//! ```toml
//! [case]
//! name = "threebus"
//! reference_bus = "L"
//!
//! [[bus]]
//! id = "G"            # name, lat, lon optional
//!
//! [[line]]
//! from = "G"
//! to = "B"
//! susceptance = 10.0  # or reactance = 0.1 (per-unit; susceptance = 1/x)
//! rating = 1.0        # optional symmetric MW limit; or flow_min/flow_max
//!
//! [[generator]]
//! id = "green1"
//! bus = "G"
//! class = "green"     # or fuel = "wind" with class derived from the fuel
//! emission_factor = 12.0
//! blocks = [{ qty = 4.0, price = 0.0 }]   # qty_min optional, default 0
//!
//! [[load]]
//! id = "load1"
//! bus = "L"
//! alpha = 3.0
//! blocks = [{ qty = 8.0, value = 4.0 }]
//! ```
//!
//! Export writes the same schema; floats round-trip exactly because values
//! are emitted with Rust's shortest-exact formatting.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::grid::{Bus, Line, Network};
use crate::orderbook::{BidBlock, EnergyClass, Generator, Load, OfferBlock, OrderBook};

use super::config::ImportOptions;
use super::IoError;

#[derive(Debug, Serialize, Deserialize)]
struct CaseDoc {
    case: CaseHeader,
    #[serde(default, rename = "bus")]
    buses: Vec<BusEntry>,
    #[serde(default, rename = "line")]
    lines: Vec<LineEntry>,
    #[serde(default, rename = "generator")]
    generators: Vec<GeneratorEntry>,
    #[serde(default, rename = "load")]
    loads: Vec<LoadEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CaseHeader {
    name: String,
    reference_bus: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    base_mva: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BusEntry {
    id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lon: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LineEntry {
    from: String,
    to: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    susceptance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reactance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rating: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    flow_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    flow_max: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GeneratorEntry {
    id: String,
    bus: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    class: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fuel: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    emission_factor: Option<f64>,
    blocks: Vec<OfferBlockEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct OfferBlockEntry {
    qty: f64,
    price: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    qty_min: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LoadEntry {
    id: String,
    bus: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    blocks: Vec<BidBlockEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BidBlockEntry {
    qty: f64,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    qty_min: Option<f64>,
}

/// Reads a native case file.
pub fn read_case(path: &Path) -> Result<(Network, OrderBook), IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_case(&text, &path.display().to_string())
}

pub fn parse_case(text: &str, path: &str) -> Result<(Network, OrderBook), IoError> {
    let doc: CaseDoc = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|span| text[..span.start.min(text.len())].lines().count().max(1))
            .unwrap_or(1);
        IoError::Parse {
            path: path.to_string(),
            line,
            message: e.message().to_string(),
        }
    })?;
    from_doc(doc, path)
}

fn from_doc(doc: CaseDoc, path: &str) -> Result<(Network, OrderBook), IoError> {
    let options = ImportOptions::default();
    let buses = doc
        .buses
        .into_iter()
        .map(|b| {
            let mut bus = Bus::new(b.id);
            if let Some(name) = b.name {
                bus = bus.with_name(name);
            }
            if let (Some(lat), Some(lon)) = (b.lat, b.lon) {
                bus = bus.with_coordinates(lat, lon);
            }
            bus
        })
        .collect();
    let lines = doc
        .lines
        .into_iter()
        .map(|l| {
            let susceptance = match (l.susceptance, l.reactance) {
                (Some(b), _) => b,
                (None, Some(x)) if x != 0.0 => 1.0 / x,
                _ => {
                    return Err(IoError::Invalid(format!(
                        "`{path}`: line {}-{} needs susceptance or a nonzero reactance",
                        l.from, l.to
                    )))
                }
            };
            let (min, max) = match (l.rating, l.flow_min, l.flow_max) {
                (Some(r), None, None) => (-r, r),
                (None, min, max) => (
                    min.unwrap_or(f64::NEG_INFINITY),
                    max.unwrap_or(f64::INFINITY),
                ),
                _ => {
                    return Err(IoError::Invalid(format!(
                        "`{path}`: line {}-{} mixes rating with flow_min/flow_max",
                        l.from, l.to
                    )))
                }
            };
            Ok(Line::new(l.from, l.to, susceptance, min, max))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let generators = doc
        .generators
        .into_iter()
        .map(|g| {
            let class = match (&g.class, &g.fuel) {
                (Some(c), _) => match c.as_str() {
                    "green" => EnergyClass::Green,
                    "black" => EnergyClass::Black,
                    other => {
                        return Err(IoError::Invalid(format!(
                            "`{path}`: generator `{}` class `{other}` is not green|black",
                            g.id
                        )))
                    }
                },
                (None, Some(fuel)) => options.class_for_fuel(fuel).ok_or_else(|| {
                    IoError::Invalid(format!(
                        "`{path}`: generator `{}` has unmapped fuel `{fuel}`",
                        g.id
                    ))
                })?,
                (None, None) => {
                    return Err(IoError::Invalid(format!(
                        "`{path}`: generator `{}` needs class or fuel",
                        g.id
                    )))
                }
            };
            let emission_factor = g.emission_factor.unwrap_or_else(|| {
                options.emission_for_fuel(g.fuel.as_deref().unwrap_or(""), class)
            });
            let blocks = g
                .blocks
                .into_iter()
                .map(|b| OfferBlock {
                    quantity_min: b.qty_min.unwrap_or(0.0),
                    quantity_max: b.qty,
                    price: b.price,
                })
                .collect();
            Ok(Generator {
                id: g.id,
                bus: g.bus,
                energy_class: class,
                blocks,
                emission_factor,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let loads = doc
        .loads
        .into_iter()
        .map(|l| Load {
            id: l.id,
            bus: l.bus,
            alpha: l.alpha.unwrap_or(0.0),
            blocks: l
                .blocks
                .into_iter()
                .map(|b| BidBlock {
                    quantity_min: b.qty_min.unwrap_or(0.0),
                    quantity_max: b.qty,
                    value: b.value,
                })
                .collect(),
        })
        .collect();
    Ok((
        Network::new(buses, lines, doc.case.reference_bus),
        OrderBook::new(generators, loads),
    ))
}

/// Serializes a network and order book back to the native format.
pub fn to_toml(name: &str, net: &Network, ob: &OrderBook) -> String {
    let doc = CaseDoc {
        case: CaseHeader {
            name: name.to_string(),
            reference_bus: net.reference_bus().to_string(),
            base_mva: None,
        },
        buses: net
            .buses()
            .iter()
            .map(|b| BusEntry {
                id: b.id.clone(),
                name: (b.name != b.id).then(|| b.name.clone()),
                lat: b.coordinates.map(|c| c.0),
                lon: b.coordinates.map(|c| c.1),
            })
            .collect(),
        lines: net
            .lines()
            .iter()
            .map(|l| LineEntry {
                from: l.from_bus.clone(),
                to: l.to_bus.clone(),
                susceptance: Some(l.susceptance),
                reactance: None,
                rating: None,
                flow_min: l.flow_min.is_finite().then_some(l.flow_min),
                flow_max: l.flow_max.is_finite().then_some(l.flow_max),
            })
            .collect(),
        generators: ob
            .generators
            .iter()
            .map(|g| GeneratorEntry {
                id: g.id.clone(),
                bus: g.bus.clone(),
                class: Some(g.energy_class.as_str().to_string()),
                fuel: None,
                emission_factor: Some(g.emission_factor),
                blocks: g
                    .blocks
                    .iter()
                    .map(|b| OfferBlockEntry {
                        qty: b.quantity_max,
                        price: b.price,
                        qty_min: (b.quantity_min != 0.0).then_some(b.quantity_min),
                    })
                    .collect(),
            })
            .collect(),
        loads: ob
            .loads
            .iter()
            .map(|l| LoadEntry {
                id: l.id.clone(),
                bus: l.bus.clone(),
                alpha: Some(l.alpha),
                blocks: l
                    .blocks
                    .iter()
                    .map(|b| BidBlockEntry {
                        qty: b.quantity_max,
                        value: b.value,
                        qty_min: (b.quantity_min != 0.0).then_some(b.quantity_min),
                    })
                    .collect(),
            })
            .collect(),
    };
    toml::to_string_pretty(&doc).expect("schema serializes")
}

/// Writes a case file in the native format.
pub fn write_case(
    path: &Path,
    name: &str,
    net: &Network,
    ob: &OrderBook,
) -> Result<(), IoError> {
    std::fs::write(path, to_toml(name, net, ob)).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}
