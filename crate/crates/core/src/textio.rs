//! Shared tokens of the line-oriented cache and domain file formats.
//!
//! Both formats open with a header carrying `matrix=`, `kind=` and `gens=`
//! tokens so a reader can refuse files written under a different group or
//! generating set.

use crate::cayley::GeneratorSet;
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupKind, SL2Matrix, TorusBundleGroup};

pub(crate) fn matrix_token(m: &SL2Matrix) -> String {
    let (m11, m12, m21, m22) = m.entries();
    format!("matrix={m11},{m12},{m21},{m22}")
}

pub(crate) fn kind_token(kind: GroupKind) -> &'static str {
    match kind {
        GroupKind::Abelian2 => "kind=abelian2",
        GroupKind::TorusBundle => "kind=bundle",
    }
}

pub(crate) fn gens_token(gens: &GeneratorSet) -> String {
    let items: Vec<String> = gens
        .positives()
        .iter()
        .map(|(label, g)| format!("{label}:{},{},{}", g.p, g.q, g.k))
        .collect();
    format!("gens={}", items.join(";"))
}

fn expect_prefix<'a>(token: &'a str, prefix: &str, what: &str) -> Result<&'a str> {
    token
        .strip_prefix(prefix)
        .ok_or_else(|| Error::CorruptCache(format!("expected {what} token, found '{token}'")))
}

pub(crate) fn parse_i64(s: &str, what: &str) -> Result<i64> {
    s.parse::<i64>()
        .map_err(|_| Error::CorruptCache(format!("bad {what} '{s}'")))
}

pub(crate) fn parse_i32(s: &str, what: &str) -> Result<i32> {
    s.parse::<i32>()
        .map_err(|_| Error::CorruptCache(format!("bad {what} '{s}'")))
}

pub(crate) fn parse_u32(s: &str, what: &str) -> Result<u32> {
    s.parse::<u32>()
        .map_err(|_| Error::CorruptCache(format!("bad {what} '{s}'")))
}

pub(crate) fn parse_matrix_token(token: &str) -> Result<SL2Matrix> {
    let body = expect_prefix(token, "matrix=", "matrix")?;
    let parts: Vec<&str> = body.split(',').collect();
    if parts.len() != 4 {
        return Err(Error::CorruptCache(format!(
            "matrix needs 4 entries, found '{body}'"
        )));
    }
    SL2Matrix::new(
        parse_i64(parts[0], "matrix entry")?,
        parse_i64(parts[1], "matrix entry")?,
        parse_i64(parts[2], "matrix entry")?,
        parse_i64(parts[3], "matrix entry")?,
    )
    .map_err(|_| Error::CorruptCache(format!("matrix '{body}' is not unimodular")))
}

pub(crate) fn parse_kind_token(token: &str) -> Result<GroupKind> {
    match expect_prefix(token, "kind=", "kind")? {
        "abelian2" => Ok(GroupKind::Abelian2),
        "bundle" => Ok(GroupKind::TorusBundle),
        other => Err(Error::CorruptCache(format!("unknown kind '{other}'"))),
    }
}

pub(crate) fn parse_gens_token(token: &str) -> Result<Vec<(String, GroupElement)>> {
    let body = expect_prefix(token, "gens=", "gens")?;
    let mut out = Vec::new();
    for item in body.split(';') {
        let (label, coords) = item
            .split_once(':')
            .ok_or_else(|| Error::CorruptCache(format!("bad generator item '{item}'")))?;
        let parts: Vec<&str> = coords.split(',').collect();
        if label.is_empty() || parts.len() != 3 {
            return Err(Error::CorruptCache(format!("bad generator item '{item}'")));
        }
        out.push((
            label.to_string(),
            GroupElement::new(
                parse_i64(parts[0], "generator coordinate")?,
                parse_i64(parts[1], "generator coordinate")?,
                parse_i32(parts[2], "generator coordinate")?,
            ),
        ));
    }
    Ok(out)
}

/// Checks a parsed header against the group and generator set the caller
/// is actually working with.
pub(crate) fn check_header_matches(
    file_matrix: &SL2Matrix,
    file_kind: GroupKind,
    file_positives: &[(String, GroupElement)],
    group: &TorusBundleGroup,
    gens: &GeneratorSet,
) -> Result<()> {
    if file_matrix != group.matrix() {
        return Err(Error::ConfigMismatch(format!(
            "file matrix {file_matrix} differs from configured matrix {}",
            group.matrix()
        )));
    }
    if file_kind != group.kind() {
        return Err(Error::ConfigMismatch(
            "file group kind differs from configuration".into(),
        ));
    }
    if file_positives != gens.positives() {
        return Err(Error::ConfigMismatch(
            "file generating set differs from configuration".into(),
        ));
    }
    Ok(())
}
