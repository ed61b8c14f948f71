//! The standard alist text format for parity-check matrices.
//!
//! Layout: dimensions (bits, checks), maximum degrees, per-bit degrees,
//! per-check degrees, then one adjacency line per bit and per check with
//! 1-based indices padded to the maximum degree with zeros.  Writing is
//! canonical (single spaces, trailing newline) so that parse -> write is
//! byte-exact on files we produced.

use super::{LdpcCode, LdpcError};

pub(super) fn write(code: &LdpcCode) -> String {
    let max_bit_deg = (0..code.n_bits())
        .map(|b| code.bit_neighbors(b).len())
        .max()
        .unwrap_or(0);
    let max_check_deg = (0..code.n_checks())
        .map(|c| code.check_neighbors(c).len())
        .max()
        .unwrap_or(0);

    let mut out = String::new();
    out.push_str(&format!("{} {}\n", code.n_bits(), code.n_checks()));
    out.push_str(&format!("{max_bit_deg} {max_check_deg}\n"));
    let bit_degs: Vec<String> = (0..code.n_bits())
        .map(|b| code.bit_neighbors(b).len().to_string())
        .collect();
    out.push_str(&bit_degs.join(" "));
    out.push('\n');
    let check_degs: Vec<String> = (0..code.n_checks())
        .map(|c| code.check_neighbors(c).len().to_string())
        .collect();
    out.push_str(&check_degs.join(" "));
    out.push('\n');
    for b in 0..code.n_bits() {
        let mut ids: Vec<String> = code
            .bit_neighbors(b)
            .iter()
            .map(|&c| (c + 1).to_string())
            .collect();
        ids.resize(max_bit_deg, "0".to_string());
        out.push_str(&ids.join(" "));
        out.push('\n');
    }
    for c in 0..code.n_checks() {
        let mut ids: Vec<String> = code
            .check_neighbors(c)
            .iter()
            .map(|&b| (b + 1).to_string())
            .collect();
        ids.resize(max_check_deg, "0".to_string());
        out.push_str(&ids.join(" "));
        out.push('\n');
    }
    out
}

/// Parse an alist into (n_bits, check adjacency).  The redundant degree and
/// transpose information is verified, not trusted.
pub(super) fn parse(text: &str) -> Result<(usize, Vec<Vec<u32>>), LdpcError> {
    let mut nums = text.split_whitespace().map(|t| {
        t.parse::<i64>()
            .map_err(|_| LdpcError::Alist(format!("not an integer: {t:?}")))
    });
    let mut next = |what: &str| -> Result<i64, LdpcError> {
        nums.next()
            .ok_or_else(|| LdpcError::Alist(format!("unexpected end before {what}")))?
    };

    let n_bits = next("bit count")?;
    let n_checks = next("check count")?;
    if n_bits <= 0 || n_checks <= 0 {
        return Err(LdpcError::Alist("non-positive dimensions".into()));
    }
    let (n_bits, n_checks) = (n_bits as usize, n_checks as usize);
    let max_bit_deg = next("max bit degree")? as usize;
    let max_check_deg = next("max check degree")? as usize;

    let mut bit_degs = Vec::with_capacity(n_bits);
    for i in 0..n_bits {
        let d = next("bit degree")?;
        if d < 0 || d as usize > max_bit_deg {
            return Err(LdpcError::Alist(format!("bit {i} degree {d} out of range")));
        }
        bit_degs.push(d as usize);
    }
    let mut check_degs = Vec::with_capacity(n_checks);
    for i in 0..n_checks {
        let d = next("check degree")?;
        if d < 0 || d as usize > max_check_deg {
            return Err(LdpcError::Alist(format!(
                "check {i} degree {d} out of range"
            )));
        }
        check_degs.push(d as usize);
    }

    let mut bit_adjacency: Vec<Vec<u32>> = Vec::with_capacity(n_bits);
    for (b, &deg) in bit_degs.iter().enumerate() {
        let mut checks = Vec::with_capacity(deg);
        for slot in 0..max_bit_deg {
            let v = next("bit adjacency")?;
            if slot < deg {
                if v < 1 || v as usize > n_checks {
                    return Err(LdpcError::Alist(format!(
                        "bit {b} check id {v} out of range"
                    )));
                }
                checks.push((v - 1) as u32);
            } else if v != 0 {
                return Err(LdpcError::Alist(format!(
                    "bit {b} padding must be 0, got {v}"
                )));
            }
        }
        bit_adjacency.push(checks);
    }
    let mut check_adjacency: Vec<Vec<u32>> = Vec::with_capacity(n_checks);
    for (c, &deg) in check_degs.iter().enumerate() {
        let mut bits = Vec::with_capacity(deg);
        for slot in 0..max_check_deg {
            let v = next("check adjacency")?;
            if slot < deg {
                if v < 1 || v as usize > n_bits {
                    return Err(LdpcError::Alist(format!(
                        "check {c} bit id {v} out of range"
                    )));
                }
                bits.push((v - 1) as u32);
            } else if v != 0 {
                return Err(LdpcError::Alist(format!(
                    "check {c} padding must be 0, got {v}"
                )));
            }
        }
        check_adjacency.push(bits);
    }
    if nums.next().is_some() {
        return Err(LdpcError::Alist("trailing data".into()));
    }

    // The two adjacency views must be transposes of each other.
    let mut rebuilt: Vec<Vec<u32>> = vec![Vec::new(); n_checks];
    for (b, checks) in bit_adjacency.iter().enumerate() {
        for &c in checks {
            rebuilt[c as usize].push(b as u32);
        }
    }
    for (c, bits) in check_adjacency.iter().enumerate() {
        let mut sorted = bits.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(LdpcError::Alist(format!("check {c} lists a bit twice")));
        }
        rebuilt[c].sort_unstable();
        if rebuilt[c] != sorted {
            return Err(LdpcError::Alist(format!(
                "check {c}: bit and check adjacency disagree"
            )));
        }
    }

    Ok((n_bits, check_adjacency))
}
