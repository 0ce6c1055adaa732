//! Text interchange: a `# taxonomy <name>` line, then one point per line as
//! `x y z r g b intensity real pseudo`. Floats are printed in shortest
//! round-trip form, so conversion in both directions is lossless.

use std::io::{BufRead, Write};

use super::{LabeledCloud, PointRecord};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::taxonomy::TaxonomyId;

pub fn write_ascii<W: Write>(cloud: &LabeledCloud, mut sink: W) -> Result<()> {
    cloud.validate()?;
    writeln!(sink, "# taxonomy {}", cloud.taxonomy)?;
    for i in 0..cloud.len() {
        writeln!(
            sink,
            "{:?} {:?} {:?} {} {} {} {:?} {} {}",
            cloud.x[i],
            cloud.y[i],
            cloud.z[i],
            cloud.r[i],
            cloud.g[i],
            cloud.b[i],
            cloud.intensity[i],
            cloud.real_label[i],
            cloud.pseudo_label[i]
        )?;
    }
    sink.flush()?;
    Ok(())
}

pub fn read_ascii<R: BufRead>(source: R) -> Result<LabeledCloud> {
    let mut cloud: Option<LabeledCloud> = None;
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(comment) = text.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some("taxonomy") && cloud.is_none() {
                let name = words.next().unwrap_or("");
                let taxonomy: TaxonomyId = name
                    .parse()
                    .map_err(|_| Error::Parse { line: lineno, message: format!("unknown taxonomy '{name}'") })?;
                cloud = Some(LabeledCloud::new(taxonomy, ""));
            }
            continue;
        }
        let cloud = cloud.get_or_insert_with(|| LabeledCloud::new(TaxonomyId::Gold, ""));
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 9 {
            return Err(Error::Parse { line: lineno, message: format!("expected 9 fields, found {}", fields.len()) });
        }
        let bad = |what: &str| Error::Parse { line: lineno, message: format!("invalid {what}") };
        let f = |i: usize, what: &str| fields[i].parse::<f64>().map_err(|_| bad(what));
        let u = |i: usize, what: &str| fields[i].parse::<u8>().map_err(|_| bad(what));
        cloud.push(PointRecord {
            position: Vec3::new(f(0, "x")?, f(1, "y")?, f(2, "z")?),
            rgb: [u(3, "r")?, u(4, "g")?, u(5, "b")?],
            intensity: fields[6].parse::<f32>().map_err(|_| bad("intensity"))?,
            real_label: u(7, "real label")?,
            pseudo_label: u(8, "pseudo label")?,
        });
    }
    let cloud = cloud.unwrap_or_else(|| LabeledCloud::new(TaxonomyId::Gold, ""));
    cloud.validate()?;
    Ok(cloud)
}
