//! The twelve PAMAP2 protocol activities.
//!
//! Canonical order (`A1`..`A12`) is alphabetical by name. PAMAP2 stores
//! activities under its own numeric ids, and id 0 marks transient samples
//! between activities.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Activity {
    AscendingStairs,
    Cycling,
    DescendingStairs,
    Ironing,
    Lying,
    NordicWalking,
    RopeJumping,
    Running,
    Sitting,
    Standing,
    VacuumCleaning,
    Walking,
}

pub const N_ACTIVITIES: usize = 12;

/// Numeric id PAMAP2 uses for samples between activities.
pub const TRANSIENT_ID: u32 = 0;

impl Activity {
    pub const ALL: [Activity; N_ACTIVITIES] = [
        Activity::AscendingStairs,
        Activity::Cycling,
        Activity::DescendingStairs,
        Activity::Ironing,
        Activity::Lying,
        Activity::NordicWalking,
        Activity::RopeJumping,
        Activity::Running,
        Activity::Sitting,
        Activity::Standing,
        Activity::VacuumCleaning,
        Activity::Walking,
    ];

    /// Zero-based canonical index (`A1` is 0).
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Activity> {
        Self::ALL.get(index).copied()
    }

    /// Short code used in report headers, `A1`..`A12`.
    pub fn code(self) -> String {
        format!("A{}", self.index() + 1)
    }

    pub fn name(self) -> &'static str {
        match self {
            Activity::AscendingStairs => "ascending stairs",
            Activity::Cycling => "cycling",
            Activity::DescendingStairs => "descending stairs",
            Activity::Ironing => "ironing",
            Activity::Lying => "lying",
            Activity::NordicWalking => "nordic walking",
            Activity::RopeJumping => "rope jumping",
            Activity::Running => "running",
            Activity::Sitting => "sitting",
            Activity::Standing => "standing",
            Activity::VacuumCleaning => "vacuum cleaning",
            Activity::Walking => "walking",
        }
    }

    pub fn pamap_id(self) -> u32 {
        match self {
            Activity::Lying => 1,
            Activity::Sitting => 2,
            Activity::Standing => 3,
            Activity::Walking => 4,
            Activity::Running => 5,
            Activity::Cycling => 6,
            Activity::NordicWalking => 7,
            Activity::AscendingStairs => 12,
            Activity::DescendingStairs => 13,
            Activity::VacuumCleaning => 16,
            Activity::Ironing => 17,
            Activity::RopeJumping => 24,
        }
    }

    /// Maps a PAMAP2 activity id to a protocol activity. Returns `None` for the
    /// transient id and for anything outside the protocol.
    pub fn from_pamap_id(id: u32) -> Option<Activity> {
        Self::ALL.iter().copied().find(|a| a.pamap_id() == id)
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activity {
    type Err = String;

    /// Accepts the `A1`..`A12` code or the activity name.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Some(num) = t.strip_prefix('A').and_then(|n| n.parse::<usize>().ok()) {
            if (1..=N_ACTIVITIES).contains(&num) {
                return Ok(Activity::ALL[num - 1]);
            }
        }
        let lower = t.to_ascii_lowercase().replace('_', " ");
        Self::ALL
            .iter()
            .copied()
            .find(|a| a.name() == lower)
            .ok_or_else(|| format!("unknown activity {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn pamap_mapping_is_bijective() {
        let ids: HashSet<u32> = Activity::ALL.iter().map(|a| a.pamap_id()).collect();
        assert_eq!(ids.len(), N_ACTIVITIES);
        for a in Activity::ALL {
            assert_eq!(Activity::from_pamap_id(a.pamap_id()), Some(a));
        }
        assert_eq!(Activity::from_pamap_id(TRANSIENT_ID), None);
        assert_eq!(Activity::from_pamap_id(9), None);
    }

    #[test]
    fn codes_follow_alphabetical_order() {
        assert_eq!(Activity::AscendingStairs.code(), "A1");
        assert_eq!(Activity::Cycling.code(), "A2");
        assert_eq!(Activity::Sitting.code(), "A9");
        assert_eq!(Activity::Walking.code(), "A12");
        let mut names: Vec<&str> = Activity::ALL.iter().map(|a| a.name()).collect();
        let sorted = {
            let mut s = names.clone();
            s.sort();
            s
        };
        assert_eq!(names, sorted);
        names.dedup();
        assert_eq!(names.len(), N_ACTIVITIES);
    }

    #[test]
    fn parse_code_and_name() {
        assert_eq!("A7".parse::<Activity>().unwrap(), Activity::RopeJumping);
        assert_eq!("nordic_walking".parse::<Activity>().unwrap(), Activity::NordicWalking);
        assert!("A13".parse::<Activity>().is_err());
    }
}
