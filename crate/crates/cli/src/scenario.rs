//! Scenario files: `{ "k": 4, "bidders": [{ "id", "demand", "valuation", "group"? }] }`.
//!
//! Valuations are rational strings (`"10"`, `"21/4"`). A scenario is grouped
//! iff its bidders carry a `group` field, in which case all of them must.
//! Groups are ordered by first appearance.

use serde::{Deserialize, Serialize};

use rm_auctions::verify::AnyProfile;
use rm_auctions::{AuctionError, Bidder, Group, GroupedProfile, Rational, TypeProfile};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioBidder {
    pub id: String,
    pub demand: u32,
    pub valuation: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub k: u32,
    pub bidders: Vec<ScenarioBidder>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scenario {
    Flat(TypeProfile),
    Grouped(GroupedProfile),
}

impl Scenario {
    pub fn k(&self) -> u32 {
        match self {
            Scenario::Flat(p) => p.k(),
            Scenario::Grouped(p) => p.k(),
        }
    }

    pub fn is_grouped(&self) -> bool {
        matches!(self, Scenario::Grouped(_))
    }

    /// All bidders in one pool, in file order.
    pub fn flattened(&self) -> TypeProfile {
        match self {
            Scenario::Flat(p) => p.clone(),
            Scenario::Grouped(p) => {
                TypeProfile::new(p.k(), p.bidders().cloned().collect()).expect("ids are unique across groups")
            }
        }
    }

    /// A flat scenario becomes a single group named `all`.
    pub fn grouped(&self) -> GroupedProfile {
        match self {
            Scenario::Grouped(p) => p.clone(),
            Scenario::Flat(p) => {
                let group = Group {
                    id: "all".into(),
                    bidders: p.bidders().to_vec(),
                };
                GroupedProfile::new(p.k(), vec![group]).expect("flat profile is valid")
            }
        }
    }

    pub fn to_file(&self) -> ScenarioFile {
        match self {
            Scenario::Flat(p) => profile_to_file(&AnyProfile::Flat(p.clone())),
            Scenario::Grouped(p) => profile_to_file(&AnyProfile::Grouped(p.clone())),
        }
    }
}

pub fn profile_to_file(profile: &AnyProfile) -> ScenarioFile {
    let row = |b: &Bidder, group: Option<&str>| ScenarioBidder {
        id: b.id.clone(),
        demand: b.demand,
        valuation: b.valuation.clone(),
        group: group.map(str::to_string),
    };
    match profile {
        AnyProfile::Flat(p) => ScenarioFile {
            k: p.k(),
            bidders: p.bidders().iter().map(|b| row(b, None)).collect(),
        },
        AnyProfile::Grouped(p) => ScenarioFile {
            k: p.k(),
            bidders: p
                .groups()
                .iter()
                .flat_map(|g| g.bidders.iter().map(move |b| row(b, Some(&g.id))))
                .collect(),
        },
    }
}

/// 1-based line of the `index`-th bidder object (its `"id"` key).
fn bidder_line(text: &str, index: usize) -> Option<usize> {
    let offset = text.match_indices("\"id\"").nth(index)?.0;
    Some(text[..offset].matches('\n').count() + 1)
}

fn bidder_index(file: &ScenarioFile, id: &str) -> Option<usize> {
    file.bidders.iter().position(|b| b.id == id)
}

fn anchor_error(text: &str, file: &ScenarioFile, err: AuctionError) -> CliError {
    let id = match &err {
        AuctionError::DemandOutOfRange { id, .. }
        | AuctionError::NegativeValuation { id, .. }
        | AuctionError::UnknownBidder(id) => Some(id.clone()),
        AuctionError::DuplicateBidder(id) => {
            // Point at the second occurrence.
            file.bidders
                .iter()
                .enumerate()
                .filter(|(_, b)| &b.id == id)
                .nth(1)
                .map(|(i, _)| i.to_string())
        }
        _ => None,
    };
    let line = match (&err, id) {
        (AuctionError::DuplicateBidder(_), Some(pos)) => pos.parse().ok().and_then(|i| bidder_line(text, i)),
        (_, Some(id)) => bidder_index(file, &id).and_then(|i| bidder_line(text, i)),
        _ => None,
    };
    CliError::Input {
        line: line.or(Some(1)),
        message: err.to_string(),
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| CliError::Input {
        line: Some(e.line()),
        message: e.to_string(),
    })?;
    from_file(text, &file)
}

fn from_file(text: &str, file: &ScenarioFile) -> Result<Scenario, CliError> {
    let with_group = file.bidders.iter().filter(|b| b.group.is_some()).count();
    if with_group > 0 && with_group < file.bidders.len() {
        let missing = file.bidders.iter().position(|b| b.group.is_none()).unwrap();
        return Err(CliError::Input {
            line: bidder_line(text, missing),
            message: format!(
                "bidder `{}` has no group, but other bidders do; either all bidders carry a group or none",
                file.bidders[missing].id
            ),
        });
    }
    let bidders = file
        .bidders
        .iter()
        .map(|b| Bidder::new(b.id.clone(), b.demand, b.valuation.clone()));
    if with_group == 0 {
        let profile = TypeProfile::new(file.k, bidders.collect()).map_err(|e| anchor_error(text, file, e))?;
        return Ok(Scenario::Flat(profile));
    }
    let mut groups: Vec<Group> = Vec::new();
    for (row, b) in file.bidders.iter().zip(bidders) {
        let gid = row.group.as_deref().unwrap();
        match groups.iter_mut().find(|g| g.id == gid) {
            Some(g) => g.bidders.push(b),
            None => groups.push(Group {
                id: gid.to_string(),
                bidders: vec![b],
            }),
        }
    }
    let profile = GroupedProfile::new(file.k, groups).map_err(|e| anchor_error(text, file, e))?;
    Ok(Scenario::Grouped(profile))
}

pub fn load_scenario(path: &std::path::Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario(&text).map_err(|e| e.with_path(path))
}

pub fn to_json(file: &ScenarioFile) -> String {
    serde_json::to_string_pretty(file).expect("scenario serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = r#"{
  "k": 4,
  "bidders": [
    { "id": "b1", "demand": 2, "valuation": "10" },
    { "id": "b2", "demand": 1, "valuation": "4" },
    { "id": "b3", "demand": 2, "valuation": "6" },
    { "id": "b4", "demand": 1, "valuation": "1" },
    { "id": "b5", "demand": 3, "valuation": "9" },
    { "id": "b6", "demand": 4, "valuation": "6" }
  ]
}"#;

    #[test]
    fn parses_flat() {
        let s = parse_scenario(GOLDEN).unwrap();
        assert!(!s.is_grouped());
        assert_eq!(s.k(), 4);
        assert_eq!(s.flattened().bidders().len(), 6);
    }

    #[test]
    fn round_trip() {
        let s = parse_scenario(GOLDEN).unwrap();
        let again = parse_scenario(&to_json(&s.to_file())).unwrap();
        assert_eq!(s, again);
        let grouped = r#"{"k": 2, "bidders": [
            {"id": "a", "demand": 1, "valuation": "21/4", "group": "x"},
            {"id": "b", "demand": 2, "valuation": "3", "group": "y"},
            {"id": "c", "demand": 1, "valuation": "0", "group": "x"}]}"#;
        let s = parse_scenario(grouped).unwrap();
        match &s {
            Scenario::Grouped(p) => {
                assert_eq!(p.groups().len(), 2);
                assert_eq!(p.groups()[0].bidders.len(), 2);
            }
            _ => panic!("expected grouped"),
        }
        assert_eq!(parse_scenario(&to_json(&s.to_file())).unwrap(), s);
    }

    #[test]
    fn malformed_valuation_is_line_anchored() {
        let text = "{\n  \"k\": 2,\n  \"bidders\": [\n    {\"id\": \"a\", \"demand\": 1, \"valuation\": \"1/0\"}\n  ]\n}";
        match parse_scenario(text) {
            Err(CliError::Input { line, message }) => {
                assert_eq!(line, Some(4));
                assert!(message.contains("zero denominator"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn demand_error_points_at_bidder() {
        let text = "{\n  \"k\": 2,\n  \"bidders\": [\n    {\"id\": \"a\", \"demand\": 1, \"valuation\": \"1\"},\n    {\"id\": \"b\", \"demand\": 3, \"valuation\": \"1\"}\n  ]\n}";
        match parse_scenario(text) {
            Err(CliError::Input { line, .. }) => assert_eq!(line, Some(5)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mixed_groups_rejected() {
        let text = r#"{"k": 2, "bidders": [
            {"id": "a", "demand": 1, "valuation": "1", "group": "x"},
            {"id": "b", "demand": 1, "valuation": "1"}]}"#;
        assert!(matches!(parse_scenario(text), Err(CliError::Input { line: Some(3), .. })));
    }

    #[test]
    fn negative_valuation_rejected() {
        let text = r#"{"k": 2, "bidders": [{"id": "a", "demand": 1, "valuation": "-1/2"}]}"#;
        assert!(parse_scenario(text).is_err());
    }
}
