use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use serde::de::DeserializeOwned;
use serde::Serialize;

pub enum Outcome {
    Success,
    /// A computed invariant did not hold; exit status 2.
    InvariantFailure,
}

pub enum Failure {
    /// Exit status 2.
    Invariant(anyhow::Error),
    /// Bad input, configuration or I/O; exit status 3.
    Config(anyhow::Error),
}

impl Failure {
    pub fn config(e: impl std::fmt::Display) -> Self {
        Failure::Config(anyhow::anyhow!("{e}"))
    }
}

impl From<hsstab::Error> for Failure {
    fn from(e: hsstab::Error) -> Self {
        use hsstab::Error::*;
        let config = matches!(
            e,
            Io(_) | Json(_) | InvalidArgument(_) | InvalidPresentation(_) | InvalidGroup(_)
        );
        if config {
            Failure::Config(e.into())
        } else {
            Failure::Invariant(e.into())
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Config(e)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(io::BufReader::new(file))
        .with_context(|| format!("parsing {}", path.display()))
}

fn sink(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> anyhow::Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// One JSON object per line.
pub fn write_records<T: Serialize>(path: Option<&Path>, records: &[T]) -> anyhow::Result<()> {
    let mut w = sink(path)?;
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
