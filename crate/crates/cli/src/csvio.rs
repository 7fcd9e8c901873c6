//! Scenario and bid files.
//!
//! Scenario files are CSV with header `id,v,q,b`. Lines starting with `#`
//! are comments; `key=value` tokens in them set `budget` and `foc_mode`.
//! Bid files are CSV with header `id,c`.

use std::path::Path;

use pricefill_core::{Budget, FocMode, Scenario, UserProfile};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
struct UserRow {
    id: usize,
    v: f64,
    q: f64,
    b: f64,
}

#[derive(Debug, Deserialize)]
struct BidRow {
    id: usize,
    c: f64,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn check_header(rdr: &mut csv::Reader<&[u8]>, want: &[&str]) -> Result<(), CliError> {
    let headers = rdr.headers().map_err(|e| CliError::Parse(e.to_string()))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != want {
        return Err(CliError::Parse(format!(
            "expected header `{}`, found `{}`",
            want.join(","),
            got.join(",")
        )));
    }
    Ok(())
}

pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let mut budget = Budget::default();
    let mut foc_mode = FocMode::default();
    for line in text.lines().map(str::trim_start) {
        let Some(comment) = line.strip_prefix('#') else {
            continue;
        };
        for token in comment.split(|c: char| c.is_whitespace() || c == ',') {
            match token.split_once('=') {
                Some(("budget", value)) => {
                    let phi: f64 = value
                        .parse()
                        .map_err(|_| CliError::Parse(format!("bad budget `{value}`")))?;
                    budget = Budget::new(phi).map_err(|e| CliError::Parse(e.to_string()))?;
                }
                Some(("foc_mode", value)) => {
                    foc_mode = value.parse().map_err(CliError::Parse)?;
                }
                _ => {}
            }
        }
    }

    let mut rdr = reader(text);
    check_header(&mut rdr, &["id", "v", "q", "b"])?;
    let mut users = Vec::new();
    for row in rdr.deserialize::<UserRow>() {
        let row = row.map_err(|e| CliError::Parse(e.to_string()))?;
        let user = UserProfile::new(row.id, row.v, row.q, row.b)
            .map_err(|e| CliError::Parse(e.to_string()))?;
        users.push(user);
    }
    if users.is_empty() {
        return Err(CliError::Parse("scenario has no users".into()));
    }
    users.sort_by_key(|u| u.id);
    Scenario::new(users, budget, foc_mode).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    parse_scenario(&read(path)?)
}

/// Bids indexed by user id. Ids must cover `0..n` exactly once.
pub fn parse_bids(text: &str) -> Result<Vec<f64>, CliError> {
    let mut rdr = reader(text);
    check_header(&mut rdr, &["id", "c"])?;
    let mut rows = Vec::new();
    for row in rdr.deserialize::<BidRow>() {
        rows.push(row.map_err(|e| CliError::Parse(e.to_string()))?);
    }
    rows.sort_by_key(|r| r.id);
    for (position, r) in rows.iter().enumerate() {
        if r.id != position {
            return Err(CliError::Parse(format!(
                "bid ids must be contiguous from 0; position {position} holds id {}",
                r.id
            )));
        }
        if !(r.c.is_finite() && r.c >= 0.0) {
            return Err(CliError::Parse(format!(
                "bid for user {} must be non-negative, got {}",
                r.id, r.c
            )));
        }
    }
    Ok(rows.into_iter().map(|r| r.c).collect())
}

pub fn load_bids(path: &Path) -> Result<Vec<f64>, CliError> {
    parse_bids(&read(path)?)
}

/// Full-precision scenario file; `parse_scenario` reads it back exactly.
pub fn write_scenario(scenario: &Scenario) -> String {
    let mut out = format!(
        "# budget={}\n# foc_mode={}\nid,v,q,b\n",
        scenario.budget.phi(),
        scenario.foc_mode.as_str()
    );
    for u in &scenario.users {
        out.push_str(&format!(
            "{},{},{},{}\n",
            u.id, u.valuation, u.quality, u.demand
        ));
    }
    out
}

pub fn write_bids(bids: &[f64]) -> String {
    let mut out = String::from("id,c\n");
    for (id, c) in bids.iter().enumerate() {
        out.push_str(&format!("{id},{c}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_options_and_rows() {
        let text = "# Case 2\n# budget=2 foc_mode=exact_log2\nid,v,q,b\n1,1,2,1.5\n0,1,1,1.5\n";
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.budget.phi(), 2.0);
        assert_eq!(s.foc_mode, FocMode::ExactLog2);
        assert_eq!(s.users.len(), 2);
        assert_eq!(s.users[0].quality, 1.0);
    }

    #[test]
    fn defaults() {
        let s = parse_scenario("id,v,q,b\n0,1,2,1\n").unwrap();
        assert_eq!(s.budget.phi(), 1.0);
        assert_eq!(s.foc_mode, FocMode::PaperFoc);
    }

    #[test]
    fn rejects_malformed_scenarios() {
        for text in [
            "",
            "id,v,q,b\n",
            "id,v,q\n0,1,2\n",
            "id,v,q,b\n0,1,2,x\n",
            "id,v,q,b\n0,1,-2,1\n",
            "id,v,q,b\n0,1,2,1\n2,1,2,1\n",
            "# budget=-1\nid,v,q,b\n0,1,2,1\n",
            "# foc_mode=newton\nid,v,q,b\n0,1,2,1\n",
        ] {
            assert!(
                matches!(parse_scenario(text), Err(CliError::Parse(_))),
                "{text:?}"
            );
        }
    }

    #[test]
    fn bids() {
        assert_eq!(
            parse_bids("id,c\n1,0.5\n0,0.25\n").unwrap(),
            vec![0.25, 0.5]
        );
        assert!(parse_bids("id,c\n0,-1\n").is_err());
        assert!(parse_bids("id,c\n0,1\n0,1\n").is_err());
        assert!(parse_bids("id,price\n0,1\n").is_err());
    }
}
