//! On-disk table cache.
//!
//! ```text
//! pswitch-table v1
//! family sp
//! set 1/2
//! max_size 3
//! 1 1/2 1/2
//! 2 1/4 (s 1/2 1/2)
//! ...
//! ```
//!
//! Entries are sorted by size, then value. Every witness is re-parsed and
//! re-evaluated on load, so a corrupted file is rejected rather than
//! trusted.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{empty_table, Family, Origin, RealizableTable};
use crate::format::parse_sp;
use crate::pswitch::PswitchSet;
use crate::rational::parse_fraction;
use crate::{Error, Result};

const MAGIC: &str = "pswitch-table v1";

pub(super) fn path_for(dir: &Path, set: &PswitchSet, max_size: usize, family: Family) -> PathBuf {
    let key = match set.uniform_q() {
        Some(q) => format!("q{q}"),
        None => set
            .values()
            .iter()
            .map(|v| format!("{}-{}", v.numer(), v.denom()))
            .collect::<Vec<_>>()
            .join("_"),
    };
    dir.join(format!("{family}-{key}-{max_size}.tbl"))
}

pub(super) fn store(path: &Path, table: &RealizableTable) -> Result<()> {
    let mut text = format!(
        "{MAGIC}\nfamily {}\nset {}\nmax_size {}\n",
        table.family, table.set, table.max_size
    );
    for (size, value) in table.iter() {
        let witness = table.witness(value).expect("listed values have witnesses");
        text.push_str(&format!("{size} {value} {witness}\n"));
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    // write-then-rename so a concurrent reader never sees a partial file
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub(super) fn load(
    path: &Path,
    set: &PswitchSet,
    max_size: usize,
    family: Family,
) -> Result<RealizableTable> {
    let bad = |message: String| Error::Cache {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let expected = [
        MAGIC.to_string(),
        format!("family {family}"),
        format!("set {set}"),
        format!("max_size {max_size}"),
    ];
    for want in &expected {
        match lines.next() {
            Some(got) if got == want => {}
            got => return Err(bad(format!("expected header {want:?}, found {got:?}"))),
        }
    }

    let mut table = empty_table(set, max_size, family);
    let mut previous = None;
    for (i, line) in lines.enumerate() {
        let lineno = i + expected.len() + 1;
        let mut parts = line.splitn(3, ' ');
        let (Some(size), Some(value), Some(expr)) = (parts.next(), parts.next(), parts.next())
        else {
            return Err(bad(format!("line {lineno}: expected 'size value witness'")));
        };
        let size: usize = size
            .parse()
            .ok()
            .filter(|k| (1..=max_size).contains(k))
            .ok_or_else(|| bad(format!("line {lineno}: bad size {size:?}")))?;
        let value = parse_fraction(value).map_err(|e| bad(format!("line {lineno}: {e}")))?;
        let witness = parse_sp(expr).map_err(|e| bad(format!("line {lineno}: {e}")))?;
        if witness.size() != size || witness.eval() != value {
            return Err(bad(format!(
                "line {lineno}: witness does not realize {value} with {size} pswitches"
            )));
        }
        if witness.leaf_probs().iter().any(|p| !set.contains(p))
            || (family == Family::Ssp && !witness.is_ssp())
        {
            return Err(bad(format!(
                "line {lineno}: witness outside the {family} family over {set}"
            )));
        }
        let key = (size, value.clone());
        if previous.as_ref().is_some_and(|prev| *prev >= key) {
            return Err(bad(format!("line {lineno}: entries not strictly sorted")));
        }
        previous = Some(key);
        if size == 1 {
            table.push(value, 1, Origin::Leaf);
        } else {
            table.push(value, size, Origin::Explicit(witness));
        }
    }
    if table.values_at(1).ne(set.values().iter()) {
        return Err(bad("size-1 entries differ from the pswitch set".into()));
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::super::{Family, Oracle};
    use crate::pswitch::PswitchSet;
    use crate::Error;

    #[test]
    fn round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let oracle = Oracle::with_cache_dir(dir.path());
        let set = PswitchSet::uniform(3).unwrap();
        let fresh = oracle.enumerate(&set, 3, Family::Sp).unwrap();
        let path = super::path_for(dir.path(), &set, 3, Family::Sp);
        assert!(path.exists());
        let loaded = oracle.enumerate(&set, 3, Family::Sp).unwrap();
        assert!(fresh.iter().eq(loaded.iter()));
        for (_, v) in loaded.iter() {
            assert_eq!(loaded.witness(v).unwrap().eval(), *v);
        }

        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, text.replace("(s 1/3 1/3)", "(s 1/3 2/3)")).unwrap();
        assert!(matches!(
            oracle.enumerate(&set, 3, Family::Sp),
            Err(Error::Cache { .. })
        ));
        std::fs::write(&path, "pswitch-table v0\n").unwrap();
        assert!(matches!(
            oracle.enumerate(&set, 3, Family::Sp),
            Err(Error::Cache { .. })
        ));
    }
}
