use crate::cache::Cache;
use clap::ValueEnum;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Tsv,
}

/// Outcome mapped onto the exit-code contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    PropertyFailed,
    Unresolved,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::PropertyFailed => 1,
            Outcome::Unresolved => 2,
        }
    }
}

pub fn classify_error(err: &anyhow::Error) -> i32 {
    if let Some(core) = err.downcast_ref::<frlab_core::Error>() {
        match core {
            frlab_core::Error::CertificateFailed { .. } => return 1,
            frlab_core::Error::BudgetExhausted(_) => return 2,
            _ => return 3,
        }
    }
    3
}

pub struct Ctx {
    pub format: Format,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub cache: Cache,
}

impl Ctx {
    /// Prints the report in the selected format and mirrors the JSON
    /// payload to `--out` when given.
    pub fn emit<T: Serialize>(
        &self,
        payload: &T,
        text: impl FnOnce() -> String,
    ) -> anyhow::Result<()> {
        let json = serde_json::to_string_pretty(payload)?;
        match self.format {
            Format::Text => println!("{}", text()),
            Format::Json | Format::Tsv => println!("{json}"),
        }
        if let Some(path) = &self.out {
            std::fs::write(path, json)?;
        }
        Ok(())
    }

    /// TSV goes through its own renderer where a command supports it.
    pub fn emit_tsv<T: Serialize>(
        &self,
        payload: &T,
        text: impl FnOnce() -> String,
        tsv: impl FnOnce() -> String,
    ) -> anyhow::Result<()> {
        match self.format {
            Format::Tsv => {
                println!("{}", tsv());
                if let Some(path) = &self.out {
                    std::fs::write(path, serde_json::to_string_pretty(payload)?)?;
                }
                Ok(())
            }
            _ => self.emit(payload, text),
        }
    }
}

pub fn parse_set(text: &str) -> anyhow::Result<frlab_core::ElemSet> {
    let mut out = frlab_core::ElemSet::empty();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let x: usize = part
            .parse()
            .map_err(|_| frlab_core::Error::MalformedInput(format!("bad element {part}")))?;
        if x >= frlab_core::MAX_UNIVERSE {
            return Err(frlab_core::Error::OutOfUniverse(x).into());
        }
        out.insert(x);
    }
    Ok(out)
}

pub fn parse_perm(text: &str, degree: usize) -> anyhow::Result<frlab_core::Perm> {
    // Either an image table "1,0,2" or cycles "(0 1)(2 3)".
    if text.trim_start().starts_with('(') {
        let mut cycles: Vec<Vec<usize>> = vec![];
        for chunk in text.split(')').map(str::trim).filter(|s| !s.is_empty()) {
            let inner = chunk.trim_start_matches('(');
            let members: Vec<usize> = inner
                .split(|c: char| c == ' ' || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| frlab_core::Error::MalformedInput(format!("bad cycle {chunk}")))?;
            cycles.push(members);
        }
        let borrowed: Vec<&[usize]> = cycles.iter().map(|c| c.as_slice()).collect();
        Ok(frlab_core::Perm::from_cycles(degree, &borrowed)?)
    } else {
        let images: Vec<usize> = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| frlab_core::Error::MalformedInput(format!("bad image table {text}")))?;
        Ok(frlab_core::Perm::from_images(images)?)
    }
}
