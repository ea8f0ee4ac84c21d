//! The built-in level catalog and its reference solutions.

use serde::{Deserialize, Serialize};

use super::{parse_level, parse_path_csv, Level, LevelError, Result};
use crate::control::{ControlPath, PathOrigin};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lab {
    Cool,
    Tunneling,
    Control,
}

impl Lab {
    pub const ALL: [Lab; 3] = [Lab::Cool, Lab::Tunneling, Lab::Control];

    pub fn as_str(self) -> &'static str {
        match self {
            Lab::Cool => "cool",
            Lab::Tunneling => "tunneling",
            Lab::Control => "control",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degree {
    Bachelor,
    Master,
}

/// Scientific levels need either one completed bachelor programme
/// (partial access) or every master level (full access).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Access {
    Partial,
    Full,
}

/// Position of a built-in level in the progression tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stage {
    Tutorial { order: u8 },
    Lab { lab: Lab, degree: Degree },
    Scientific { access: Access },
}

pub struct CatalogEntry {
    pub id: &'static str,
    level_text: &'static str,
    reference_csv: &'static str,
}

macro_rules! entry {
    ($id:literal) => {
        CatalogEntry {
            id: $id,
            level_text: include_str!(concat!("../../levels/", $id, ".qmlevel")),
            reference_csv: include_str!(concat!("../../levels/", $id, ".ref.csv")),
        }
    };
}

static CATALOG: [CatalogEntry; 27] = [
    entry!("tutorial_1"),
    entry!("tutorial_2"),
    entry!("tutorial_3"),
    entry!("tutorial_4"),
    entry!("tutorial_5"),
    entry!("tutorial_6"),
    entry!("tutorial_7"),
    entry!("cool_bachelor_1"),
    entry!("cool_bachelor_2"),
    entry!("cool_bachelor_3"),
    entry!("cool_bachelor_4"),
    entry!("cool_master_1"),
    entry!("cool_master_2"),
    entry!("tunneling_bachelor_1"),
    entry!("tunneling_bachelor_2"),
    entry!("tunneling_bachelor_3"),
    entry!("tunneling_bachelor_4"),
    entry!("tunneling_master_1"),
    entry!("tunneling_master_2"),
    entry!("control_bachelor_1"),
    entry!("control_bachelor_2"),
    entry!("control_bachelor_3"),
    entry!("control_bachelor_4"),
    entry!("control_master_1"),
    entry!("control_master_2"),
    entry!("bring_home_water_fast"),
    entry!("qcomp_shuttle"),
];

pub const BUILTIN_IDS: [&str; 27] = [
    "tutorial_1",
    "tutorial_2",
    "tutorial_3",
    "tutorial_4",
    "tutorial_5",
    "tutorial_6",
    "tutorial_7",
    "cool_bachelor_1",
    "cool_bachelor_2",
    "cool_bachelor_3",
    "cool_bachelor_4",
    "cool_master_1",
    "cool_master_2",
    "tunneling_bachelor_1",
    "tunneling_bachelor_2",
    "tunneling_bachelor_3",
    "tunneling_bachelor_4",
    "tunneling_master_1",
    "tunneling_master_2",
    "control_bachelor_1",
    "control_bachelor_2",
    "control_bachelor_3",
    "control_bachelor_4",
    "control_master_1",
    "control_master_2",
    "bring_home_water_fast",
    "qcomp_shuttle",
];

impl CatalogEntry {
    pub fn stage(&self) -> Stage {
        stage_of(self.id).expect("catalog ids follow the naming scheme")
    }

    pub fn level_text(&self) -> &'static str {
        self.level_text
    }
}

pub fn catalog() -> &'static [CatalogEntry] {
    &CATALOG
}

/// Stage from the catalog naming scheme (`tutorial_N`, `<lab>_<degree>_N`).
pub fn stage_of(id: &str) -> Option<Stage> {
    match id {
        "bring_home_water_fast" => {
            return Some(Stage::Scientific {
                access: Access::Partial,
            })
        }
        "qcomp_shuttle" => {
            return Some(Stage::Scientific {
                access: Access::Full,
            })
        }
        _ => {}
    }
    if let Some(n) = id.strip_prefix("tutorial_") {
        return n.parse().ok().map(|order| Stage::Tutorial { order });
    }
    let lab = Lab::ALL
        .into_iter()
        .find(|l| id.starts_with(&format!("{}_", l.as_str())))?;
    let rest = &id[lab.as_str().len() + 1..];
    let degree = if rest.starts_with("bachelor_") {
        Degree::Bachelor
    } else if rest.starts_with("master_") {
        Degree::Master
    } else {
        return None;
    };
    Some(Stage::Lab { lab, degree })
}

fn find(id: &str) -> Result<&'static CatalogEntry> {
    CATALOG
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| LevelError::Unknown(id.to_string()))
}

pub fn builtin_level(id: &str) -> Result<Level> {
    parse_level(find(id)?.level_text)
}

pub fn builtin_levels() -> Vec<Level> {
    CATALOG
        .iter()
        .map(|e| parse_level(e.level_text).expect("built-in levels parse"))
        .collect()
}

/// Small levels for benchmarking optimisers; not part of the progression.
pub const BENCHMARK_IDS: [&str; 1] = ["two_basin"];

/// A benchmark level. `two_basin` is a 1-knot transport whose score surface
/// has a near basin around F = 0.6 at short durations and a better one
/// (F > 0.9) at roughly twice the duration.
pub fn benchmark_level(id: &str) -> Result<Level> {
    match id {
        "two_basin" => parse_level(include_str!("../../levels/bench/two_basin.qmlevel")),
        _ => Err(LevelError::Unknown(id.to_string())),
    }
}

/// The shipped solution that reaches at least one star.
pub fn reference_path(id: &str) -> Result<ControlPath> {
    parse_path_csv(find(id)?.reference_csv, PathOrigin::Reference)
}
