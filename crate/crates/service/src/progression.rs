//! Unlock tree and badge rules. Both are pure functions of a player's best
//! stars per level and play count, so replaying the log reproduces them.

use std::collections::{BTreeMap, BTreeSet};

use qmoves_core::level::{builtin_levels, catalog, Access, Degree, Lab, SkillTag, Stage};

use crate::model::BadgeKind;

/// Stars needed for a level to count as completed.
pub const COMPLETION_STARS: u8 = 1;

/// Play counts that earn an engagement badge.
pub const PLAY_COUNT_BADGES: [u64; 4] = [50, 100, 350, 1000];

#[derive(Debug, Clone)]
struct Node {
    id: String,
    stage: Stage,
    tags: Vec<SkillTag>,
}

/// The built-in progression tree.
#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadgeSpec {
    pub id: String,
    pub title: String,
    pub kind: BadgeKind,
}

impl Default for Tree {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Tree {
    pub fn builtin() -> Self {
        let nodes = catalog()
            .iter()
            .zip(builtin_levels())
            .map(|(e, level)| Node {
                id: e.id.to_string(),
                stage: e.stage(),
                tags: level.skill_tags,
            })
            .collect();
        Self { nodes }
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.id.as_str())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.iter().any(|n| n.id == id)
    }

    pub fn all(&self) -> BTreeSet<String> {
        self.ids().map(str::to_string).collect()
    }

    fn ids_where(&self, f: impl Fn(&Stage) -> bool) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|n| f(&n.stage))
            .map(|n| n.id.as_str())
            .collect()
    }

    fn tutorials(&self) -> Vec<&str> {
        self.ids_where(|s| matches!(s, Stage::Tutorial { .. }))
    }

    fn programme(&self, lab: Lab, degree: Degree) -> Vec<&str> {
        self.ids_where(|s| *s == Stage::Lab { lab, degree })
    }

    fn masters(&self) -> Vec<&str> {
        self.ids_where(|s| {
            matches!(
                s,
                Stage::Lab {
                    degree: Degree::Master,
                    ..
                }
            )
        })
    }

    /// Prerequisite levels of `id` that are not yet completed; empty when the
    /// level is unlocked.
    pub fn missing(&self, id: &str, best: &BTreeMap<String, u8>) -> Vec<String> {
        let done = |l: &&str| best.get(*l).copied().unwrap_or(0) >= COMPLETION_STARS;
        let open = |ids: Vec<&str>| -> Vec<String> {
            ids.into_iter()
                .filter(|l| !done(l))
                .map(str::to_string)
                .collect()
        };
        let Some(node) = self.nodes.iter().find(|n| n.id == id) else {
            return Vec::new();
        };
        match node.stage {
            Stage::Tutorial { order } => open(self.ids_where(|s| {
                *s == Stage::Tutorial {
                    order: order.wrapping_sub(1),
                }
            })),
            Stage::Lab {
                degree: Degree::Bachelor,
                ..
            } => open(self.tutorials()),
            Stage::Lab {
                lab,
                degree: Degree::Master,
            } => open(self.programme(lab, Degree::Bachelor)),
            Stage::Scientific {
                access: Access::Partial,
            } => Lab::ALL
                .into_iter()
                .map(|lab| open(self.programme(lab, Degree::Bachelor)))
                .min_by_key(Vec::len)
                .unwrap_or_default(),
            Stage::Scientific {
                access: Access::Full,
            } => open(self.masters()),
        }
    }

    pub fn unlocked(&self, best: &BTreeMap<String, u8>) -> BTreeSet<String> {
        self.ids()
            .filter(|id| self.missing(id, best).is_empty())
            .map(str::to_string)
            .collect()
    }

    /// Every badge the record qualifies for.
    pub fn badges(&self, best: &BTreeMap<String, u8>, play_count: u64) -> Vec<BadgeSpec> {
        let done = |l: &str| best.get(l).copied().unwrap_or(0) >= COMPLETION_STARS;
        let mut out = Vec::new();
        for lab in Lab::ALL {
            for (degree, name) in [(Degree::Bachelor, "bachelor"), (Degree::Master, "master")] {
                let ids = self.programme(lab, degree);
                if !ids.is_empty() && ids.iter().all(|l| done(l)) {
                    out.push(BadgeSpec {
                        id: format!("{name}_{}", lab.as_str()),
                        title: format!("{} of {} Lab", capitalise(name), capitalise(lab.as_str())),
                        kind: BadgeKind::Performance,
                    });
                }
            }
        }
        for tag in SkillTag::ALL {
            let mastered = self
                .nodes
                .iter()
                .any(|n| n.tags.contains(&tag) && best.get(&n.id).copied().unwrap_or(0) >= 3);
            if mastered {
                out.push(BadgeSpec {
                    id: format!("skill_{}", tag.as_str()),
                    title: format!("{} Virtuoso", capitalise(tag.as_str())),
                    kind: BadgeKind::Performance,
                });
            }
        }
        for n in PLAY_COUNT_BADGES {
            if play_count >= n {
                out.push(BadgeSpec {
                    id: format!("quantum_frenzy_{n}"),
                    title: format!("Quantum Frenzy {n}"),
                    kind: BadgeKind::Engagement,
                });
            }
        }
        out
    }
}

fn capitalise(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}
