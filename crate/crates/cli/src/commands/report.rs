use crate::args::ReportArgs;
use crate::error::{CliError, Result};
use crate::output::Outputs;
use crate::report::{csv, markdown, parse_report};

pub fn run(a: &ReportArgs) -> Result<()> {
    let rows = a
        .reports
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            parse_report(p, &text)
        })
        .collect::<Result<Vec<_>>>()?;
    let as_csv = a.out.as_ref().is_some_and(|p| p.extension().is_some_and(|x| x == "csv"));
    let table = if as_csv { csv(&rows) } else { markdown(&rows) };
    match &a.out {
        Some(path) => {
            let mut outputs = Outputs::default();
            outputs.add(path, table.into_bytes());
            outputs.commit()?;
        }
        None => print!("{table}"),
    }
    Ok(())
}
