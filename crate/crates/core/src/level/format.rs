//! The `qmlevel 1` text format and the reference-path CSV format.
//!
//! ```text
//! qmlevel 1
//! # comment
//! id: tutorial_1
//! title: First Steps
//! display_mode: ball
//! duration_max: 0.5
//! tweezer: sigma=0.05 depth_max=160 x_min=-0.8 x_max=0.8
//! initial_trap: tweezer x0=-0.3 depth=160
//! target_trap: well 0
//! star_thresholds: 0.5 0.8 0.95
//! max_points: 1000
//! time_penalty_weight: 0.2
//! skill_tags: deceleration
//! well: center=0.3 depth=160 width=0.05
//! barrier: center=0 height=40 width=0.08
//! death_zone: 0.6 0.8
//! bonus: position=0 radius=0.05 points=50
//! ```
//!
//! `sim: domain_min=.. domain_max=.. grid_points=.. dt=..` optionally
//! overrides the simulation grid.

use std::collections::HashSet;
use std::fmt::Write;

use super::{
    BonusPickup, DeathZone, DisplayMode, Feature, Level, LevelError, Result, SkillTag, Trap,
};
use crate::control::{ControlPath, PathOrigin};
use crate::quantum::{ControlSample, SimConfig, TweezerSpec};

const HEADER: &str = "qmlevel 1";

fn syntax(line: usize, message: impl Into<String>) -> LevelError {
    LevelError::Syntax {
        line,
        message: message.into(),
    }
}

fn number(line: usize, key: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| syntax(line, format!("{key}: expected a number, got {s:?}")))?;
    if !v.is_finite() {
        return Err(syntax(line, format!("{key}: {s:?} is not finite")));
    }
    Ok(v)
}

fn integer<T: std::str::FromStr>(line: usize, key: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| syntax(line, format!("{key}: expected an integer, got {s:?}")))
}

/// Parses `a=1 b=2` into values ordered as `names`; every name exactly once.
fn named<'a>(line: usize, key: &str, text: &'a str, names: &[&str]) -> Result<Vec<&'a str>> {
    let mut out: Vec<Option<&str>> = vec![None; names.len()];
    for item in text.split_whitespace() {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| syntax(line, format!("{key}: expected name=value, got {item:?}")))?;
        let slot = names
            .iter()
            .position(|n| *n == k)
            .ok_or_else(|| syntax(line, format!("{key}: unknown parameter {k:?}")))?;
        if out[slot].replace(v).is_some() {
            return Err(syntax(line, format!("{key}: parameter {k:?} given twice")));
        }
    }
    out.into_iter()
        .zip(names)
        .map(|(v, n)| v.ok_or_else(|| syntax(line, format!("{key}: missing parameter {n:?}"))))
        .collect()
}

fn named_numbers(line: usize, key: &str, text: &str, names: &[&str]) -> Result<Vec<f64>> {
    named(line, key, text, names)?
        .into_iter()
        .map(|v| number(line, key, v))
        .collect()
}

fn parse_trap(line: usize, key: &str, text: &str) -> Result<Trap> {
    let (kind, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
    match kind {
        "well" => Ok(Trap::StaticWell {
            index: integer(line, key, rest.trim())?,
        }),
        "tweezer" => {
            let v = named_numbers(line, key, rest, &["x0", "depth"])?;
            Ok(Trap::Tweezer {
                x0: v[0],
                depth: v[1],
            })
        }
        _ => Err(syntax(
            line,
            format!("{key}: expected `well <index>` or `tweezer x0=.. depth=..`"),
        )),
    }
}

/// Parses and validates a level. Solvability is not checked.
pub fn parse_level(text: &str) -> Result<Level> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, HEADER)) => {}
        Some((n, other)) => {
            return Err(syntax(
                n,
                format!("expected header {HEADER:?}, got {other:?}"),
            ))
        }
        None => return Err(syntax(1, "empty level file")),
    }

    let mut id = None;
    let mut title = None;
    let mut display_mode = None;
    let mut duration_max = None;
    let mut tweezer = None;
    let mut initial_trap = None;
    let mut target_trap = None;
    let mut star_thresholds = None;
    let mut max_points = None;
    let mut time_penalty_weight = None;
    let mut skill_tags = None;
    let mut sim = None;
    let mut features = Vec::new();
    let mut death_zones = Vec::new();
    let mut bonus_pickups = Vec::new();
    let mut seen = HashSet::new();

    for (n, line) in lines {
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| syntax(n, format!("expected `key: value`, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let repeatable = matches!(key, "well" | "barrier" | "death_zone" | "bonus");
        if !repeatable && !seen.insert(key.to_string()) {
            return Err(syntax(n, format!("{key} given twice")));
        }
        match key {
            "id" => id = Some(value.to_string()),
            "title" => title = Some(value.to_string()),
            "display_mode" => {
                display_mode = Some(match value {
                    "ball" => DisplayMode::Ball,
                    "wave" => DisplayMode::Wave,
                    _ => {
                        return Err(syntax(
                            n,
                            format!("display_mode: expected ball or wave, got {value:?}"),
                        ))
                    }
                })
            }
            "duration_max" => duration_max = Some(number(n, key, value)?),
            "tweezer" => {
                let v = named_numbers(n, key, value, &["sigma", "depth_max", "x_min", "x_max"])?;
                tweezer = Some(TweezerSpec {
                    sigma: v[0],
                    depth_max: v[1],
                    x_min: v[2],
                    x_max: v[3],
                });
            }
            "initial_trap" => initial_trap = Some(parse_trap(n, key, value)?),
            "target_trap" => target_trap = Some(parse_trap(n, key, value)?),
            "star_thresholds" => {
                let v = value
                    .split_whitespace()
                    .map(|s| number(n, key, s))
                    .collect::<Result<Vec<_>>>()?;
                let v: [f64; 3] = v
                    .try_into()
                    .map_err(|_| syntax(n, "star_thresholds: expected three numbers"))?;
                star_thresholds = Some(v);
            }
            "max_points" => max_points = Some(integer(n, key, value)?),
            "time_penalty_weight" => time_penalty_weight = Some(number(n, key, value)?),
            "skill_tags" => {
                let tags = value
                    .split_whitespace()
                    .map(|s| {
                        SkillTag::parse(s)
                            .ok_or_else(|| syntax(n, format!("skill_tags: unknown tag {s:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                skill_tags = Some(tags);
            }
            "sim" => {
                let v = named(
                    n,
                    key,
                    value,
                    &["domain_min", "domain_max", "grid_points", "dt"],
                )?;
                sim = Some(SimConfig {
                    domain_min: number(n, key, v[0])?,
                    domain_max: number(n, key, v[1])?,
                    grid_points: integer(n, key, v[2])?,
                    dt: number(n, key, v[3])?,
                });
            }
            "well" => {
                let v = named_numbers(n, key, value, &["center", "depth", "width"])?;
                features.push(Feature::Well {
                    center: v[0],
                    depth: v[1],
                    width: v[2],
                });
            }
            "barrier" => {
                let v = named_numbers(n, key, value, &["center", "height", "width"])?;
                features.push(Feature::Barrier {
                    center: v[0],
                    height: v[1],
                    width: v[2],
                });
            }
            "death_zone" => {
                let v = value
                    .split_whitespace()
                    .map(|s| number(n, key, s))
                    .collect::<Result<Vec<_>>>()?;
                match v[..] {
                    [lo, hi] => death_zones.push(DeathZone { lo, hi }),
                    _ => return Err(syntax(n, "death_zone: expected `lo hi`")),
                }
            }
            "bonus" => {
                let v = named(n, key, value, &["position", "radius", "points"])?;
                bonus_pickups.push(BonusPickup {
                    position: number(n, key, v[0])?,
                    radius: number(n, key, v[1])?,
                    points: integer(n, key, v[2])?,
                });
            }
            _ => return Err(syntax(n, format!("unknown key {key:?}"))),
        }
    }

    let missing = |field: &'static str| LevelError::Invalid {
        field,
        message: "missing".into(),
    };
    let mut level = Level::new(
        id.ok_or_else(|| missing("id"))?,
        initial_trap.ok_or_else(|| missing("initial_trap"))?,
        target_trap.ok_or_else(|| missing("target_trap"))?,
    );
    level.title = title.unwrap_or_default();
    level.display_mode = display_mode.unwrap_or(level.display_mode);
    level.duration_max = duration_max.ok_or_else(|| missing("duration_max"))?;
    level.tweezer = tweezer.ok_or_else(|| missing("tweezer"))?;
    level.star_thresholds = star_thresholds.unwrap_or(level.star_thresholds);
    level.max_points = max_points.unwrap_or(level.max_points);
    level.time_penalty_weight = time_penalty_weight.unwrap_or(level.time_penalty_weight);
    level.skill_tags = skill_tags.unwrap_or_default();
    level.sim = sim;
    level.features = features;
    level.death_zones = death_zones;
    level.bonus_pickups = bonus_pickups;
    level.validate()?;
    Ok(level)
}

fn trap_text(trap: &Trap) -> String {
    match *trap {
        Trap::StaticWell { index } => format!("well {index}"),
        Trap::Tweezer { x0, depth } => format!("tweezer x0={x0} depth={depth}"),
    }
}

/// Canonical text: every key in fixed order, numbers in shortest round-trip form.
pub fn serialize_level(level: &Level) -> String {
    let mut s = String::new();
    let l = level;
    let t = &l.tweezer;
    let [f1, f2, f3] = l.star_thresholds;
    let tags: Vec<&str> = l.skill_tags.iter().map(|t| t.as_str()).collect();
    writeln!(s, "{HEADER}").unwrap();
    writeln!(s, "id: {}", l.id).unwrap();
    writeln!(s, "title: {}", l.title).unwrap();
    writeln!(s, "display_mode: {}", l.display_mode.as_str()).unwrap();
    writeln!(s, "duration_max: {}", l.duration_max).unwrap();
    if let Some(c) = &l.sim {
        writeln!(
            s,
            "sim: domain_min={} domain_max={} grid_points={} dt={}",
            c.domain_min, c.domain_max, c.grid_points, c.dt
        )
        .unwrap();
    }
    writeln!(
        s,
        "tweezer: sigma={} depth_max={} x_min={} x_max={}",
        t.sigma, t.depth_max, t.x_min, t.x_max
    )
    .unwrap();
    writeln!(s, "initial_trap: {}", trap_text(&l.initial_trap)).unwrap();
    writeln!(s, "target_trap: {}", trap_text(&l.target_trap)).unwrap();
    writeln!(s, "star_thresholds: {f1} {f2} {f3}").unwrap();
    writeln!(s, "max_points: {}", l.max_points).unwrap();
    writeln!(s, "time_penalty_weight: {}", l.time_penalty_weight).unwrap();
    writeln!(s, "skill_tags: {}", tags.join(" ")).unwrap();
    for f in &l.features {
        match *f {
            Feature::Well {
                center,
                depth,
                width,
            } => writeln!(s, "well: center={center} depth={depth} width={width}").unwrap(),
            Feature::Barrier {
                center,
                height,
                width,
            } => writeln!(s, "barrier: center={center} height={height} width={width}").unwrap(),
        }
    }
    for z in &l.death_zones {
        writeln!(s, "death_zone: {} {}", z.lo, z.hi).unwrap();
    }
    for b in &l.bonus_pickups {
        writeln!(
            s,
            "bonus: position={} radius={} points={}",
            b.position, b.radius, b.points
        )
        .unwrap();
    }
    // "title: " with an empty title would leave trailing whitespace
    s.replace("title: \n", "title:\n")
        .replace("skill_tags: \n", "skill_tags:\n")
}

/// Reads `t,x0,depth` rows (header line required, `#` comments allowed).
pub fn parse_path_csv(text: &str, origin: PathOrigin) -> Result<ControlPath> {
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match rows.next() {
        Some((_, "t,x0,depth")) => {}
        Some((n, other)) => {
            return Err(syntax(
                n,
                format!("expected header \"t,x0,depth\", got {other:?}"),
            ))
        }
        None => return Err(syntax(1, "empty path file")),
    }
    let mut samples = Vec::new();
    for (n, row) in rows {
        let v = row
            .split(',')
            .map(|c| number(n, "path", c.trim()))
            .collect::<Result<Vec<_>>>()?;
        match v[..] {
            [t, x0, depth] => samples.push(ControlSample::new(t, x0, depth)),
            _ => return Err(syntax(n, format!("expected 3 columns, got {}", v.len()))),
        }
    }
    Ok(ControlPath::new(samples, origin)?)
}

pub fn write_path_csv(path: &ControlPath) -> String {
    let mut s = String::from("t,x0,depth\n");
    for p in path.samples() {
        writeln!(s, "{},{},{}", p.t, p.x0, p.depth).unwrap();
    }
    s
}
