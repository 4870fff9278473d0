//! alist import/export of the parity structure, for cross-checking against
//! external tools. Layout: `n m`, max degrees, per-node degree lists, then
//! 1-based adjacency lists (variables first, checks second).

use std::fmt::Write as _;

use super::LdpcCode;
use crate::{Error, Result};

pub(super) fn to_alist(code: &LdpcCode) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", code.m, code.num_checks);
    let _ = writeln!(out, "{} {}", code.dv, code.dc);
    let _ = writeln!(
        out,
        "{}",
        vec![code.dv.to_string(); code.m].join(" ")
    );
    let _ = writeln!(
        out,
        "{}",
        vec![code.dc.to_string(); code.num_checks].join(" ")
    );
    for v in 0..code.m {
        let row: Vec<String> = code.checks_of_var(v).map(|c| (c + 1).to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    for c in 0..code.num_checks {
        let row: Vec<String> = code.vars_of_check(c).map(|v| (v + 1).to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub(super) fn from_alist(text: &str) -> Result<LdpcCode> {
    let mut nums = text
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| Error::config(format!("bad alist token {t:?}"))));
    let mut next = |what: &str| -> Result<usize> {
        nums.next()
            .ok_or_else(|| Error::config(format!("alist truncated at {what}")))?
    };

    let m = next("n")?;
    let num_checks = next("m")?;
    let dv = next("max var degree")?;
    let dc = next("max check degree")?;
    if m == 0 || num_checks == 0 || m * dv != num_checks * dc {
        return Err(Error::config("alist degree arithmetic inconsistent"));
    }
    for _ in 0..m {
        if next("var degree")? != dv {
            return Err(Error::config("only regular alists are supported"));
        }
    }
    for _ in 0..num_checks {
        if next("check degree")? != dc {
            return Err(Error::config("only regular alists are supported"));
        }
    }
    let mut check_of = vec![0u32; m * dv];
    for v in 0..m {
        for s in 0..dv {
            let c = next("adjacency")?;
            if c == 0 || c > num_checks {
                return Err(Error::config(format!("check index {c} out of range")));
            }
            check_of[v * dv + s] = (c - 1) as u32;
        }
    }
    // the check-side lists are redundant; skip if present
    LdpcCode::from_parts(dv, dc, m, check_of)
}
