//! Canonical binary cloud file.
//!
//! ```text
//! magic "PCL3DSES" (8) | version u16 | taxonomy u8 | flags u8 | count u64 | reserved (12)
//! x f64×n | y f64×n | z f64×n | r u8×n | g u8×n | b u8×n | intensity f32×n | real u8×n | pseudo u8×n
//! ```
//!
//! Little-endian, blocks packed without padding.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use super::LabeledCloud;
use crate::error::{Error, Result};
use crate::taxonomy::TaxonomyId;

pub const MAGIC: &[u8; 8] = b"PCL3DSES";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 32;

pub fn write_cloud<W: Write>(cloud: &LabeledCloud, mut sink: W) -> Result<()> {
    cloud.validate()?;
    let n = cloud.len();
    let mut header = [0u8; HEADER_LEN];
    header[..8].copy_from_slice(MAGIC);
    header[8..10].copy_from_slice(&VERSION.to_le_bytes());
    header[10] = cloud.taxonomy.code();
    header[11] = 0; // flags
    header[12..20].copy_from_slice(&(n as u64).to_le_bytes());
    sink.write_all(&header)?;

    for col in [&cloud.x, &cloud.y, &cloud.z] {
        let mut buf = Vec::with_capacity(n * 8);
        for v in col {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        sink.write_all(&buf)?;
    }
    for col in [&cloud.r, &cloud.g, &cloud.b] {
        sink.write_all(col)?;
    }
    let mut buf = Vec::with_capacity(n * 4);
    for v in &cloud.intensity {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    sink.write_all(&buf)?;
    sink.write_all(&cloud.real_label)?;
    sink.write_all(&cloud.pseudo_label)?;
    sink.flush()?;
    Ok(())
}

fn read_block<R: Read>(source: &mut R, len: usize) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    // `take` bounds the allocation by what the file really holds.
    let got = source.take(len as u64).read_to_end(&mut buf)?;
    if got != len {
        return Err(Error::TruncatedFile);
    }
    Ok(buf)
}

/// Reads a cloud; `scan_id` is left empty.
pub fn read_cloud<R: Read>(mut source: R) -> Result<LabeledCloud> {
    let mut header = [0u8; HEADER_LEN];
    match source.read_exact(&mut header[..8]) {
        Ok(()) => {}
        Err(e) if e.kind() == ErrorKind::UnexpectedEof => return Err(Error::BadMagic),
        Err(e) => return Err(e.into()),
    }
    if &header[..8] != MAGIC {
        return Err(Error::BadMagic);
    }
    source.read_exact(&mut header[8..]).map_err(|e| match e.kind() {
        ErrorKind::UnexpectedEof => Error::TruncatedFile,
        _ => e.into(),
    })?;
    let version = u16::from_le_bytes([header[8], header[9]]);
    if version != VERSION {
        return Err(Error::BadVersion(version));
    }
    let taxonomy = TaxonomyId::from_code(header[10])?;
    let n = u64::from_le_bytes(header[12..20].try_into().expect("8 bytes"));
    let n = usize::try_from(n).map_err(|_| Error::TruncatedFile)?;
    let bytes = |width: usize| n.checked_mul(width).ok_or(Error::TruncatedFile);

    let mut cloud = LabeledCloud::new(taxonomy, "");
    let f64_col = |raw: Vec<u8>| -> Vec<f64> {
        raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect()
    };
    cloud.x = f64_col(read_block(&mut source, bytes(8)?)?);
    cloud.y = f64_col(read_block(&mut source, bytes(8)?)?);
    cloud.z = f64_col(read_block(&mut source, bytes(8)?)?);
    cloud.r = read_block(&mut source, n)?;
    cloud.g = read_block(&mut source, n)?;
    cloud.b = read_block(&mut source, n)?;
    cloud.intensity = read_block(&mut source, bytes(4)?)?
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    cloud.real_label = read_block(&mut source, n)?;
    cloud.pseudo_label = read_block(&mut source, n)?;
    cloud.validate()?;
    Ok(cloud)
}

/// Reads a cloud file, taking the scan id from the file stem.
pub fn read_cloud_file(path: &Path) -> Result<LabeledCloud> {
    let file = File::open(path).map_err(Error::io_at(path))?;
    let mut cloud = read_cloud(BufReader::new(file))?;
    cloud.scan_id = scan_id_of(path);
    Ok(cloud)
}

pub fn write_cloud_file(cloud: &LabeledCloud, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(Error::io_at(path))?;
    write_cloud(cloud, BufWriter::new(file))
}

pub(crate) fn scan_id_of(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::PointRecord;
    use crate::geometry::Vec3;

    fn one_point() -> LabeledCloud {
        let mut c = LabeledCloud::new(TaxonomyId::Gold, "");
        c.push(PointRecord {
            position: Vec3::ZERO,
            rgb: [255, 0, 0],
            intensity: 1.0,
            real_label: 17,
            pseudo_label: 17,
        });
        c
    }

    #[test]
    fn empty_cloud_is_header_only() {
        let mut buf = Vec::new();
        write_cloud(&LabeledCloud::new(TaxonomyId::Silver, ""), &mut buf).unwrap();
        assert_eq!(buf.len(), HEADER_LEN);
        assert_eq!(&buf[..8], MAGIC);
        assert_eq!(&buf[8..10], &[1, 0]);
        assert_eq!(buf[10], 1);
        assert!(buf[11..].iter().all(|&b| b == 0));
        let back = read_cloud(&buf[..]).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.taxonomy, TaxonomyId::Silver);
    }

    #[test]
    fn single_point_layout() {
        let c = one_point();
        let mut buf = Vec::new();
        write_cloud(&c, &mut buf).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 3 * 8 + 3 + 4 + 2);
        assert_eq!(&buf[12..20], &1u64.to_le_bytes());
        let body = &buf[HEADER_LEN..];
        assert_eq!(&body[24..27], &[255, 0, 0]);
        assert_eq!(&body[27..31], &1.0f32.to_le_bytes());
        assert_eq!(&body[31..], &[17, 17]);
        assert_eq!(read_cloud(&buf[..]).unwrap(), c);
    }

    #[test]
    fn corrupted_headers_are_rejected() {
        let mut buf = Vec::new();
        write_cloud(&one_point(), &mut buf).unwrap();

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_cloud(&bad[..]), Err(Error::BadMagic)));
        assert!(matches!(read_cloud(&buf[..4]), Err(Error::BadMagic)));

        let mut bad = buf.clone();
        bad[8] = 2;
        assert!(matches!(read_cloud(&bad[..]), Err(Error::BadVersion(2))));

        let mut bad = buf.clone();
        bad[10] = 7;
        assert!(matches!(read_cloud(&bad[..]), Err(Error::BadTaxonomy(7))));

        assert!(matches!(read_cloud(&buf[..20]), Err(Error::TruncatedFile)));
        assert!(matches!(read_cloud(&buf[..buf.len() - 1]), Err(Error::TruncatedFile)));

        let mut bad = buf.clone();
        bad[12..20].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(matches!(read_cloud(&bad[..]), Err(Error::TruncatedFile)));
    }

    #[test]
    fn intensity_out_of_range_is_rejected() {
        let mut buf = Vec::new();
        write_cloud(&one_point(), &mut buf).unwrap();
        let at = HEADER_LEN + 27;
        buf[at..at + 4].copy_from_slice(&1.5f32.to_le_bytes());
        assert!(matches!(
            read_cloud(&buf[..]),
            Err(Error::IntensityOutOfRange { index: 0, value }) if value == 1.5
        ));
    }
}
