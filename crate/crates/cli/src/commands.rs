use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sisx_core::density::column_density;
use sisx_core::json::to_canonical_string;
use sisx_core::regression::{correlation_matrix, scatter3d_data, ModelSpec};
use sisx_core::sampling::{draw_sample, sample_size_detail, SampleSizeParams};
use sisx_core::store::schema::ColumnSchema;
use sisx_core::store::{
    filter, ingest, region_totals, summarize, CentroidTable, Clause, CleaningRules, FilterSpec, IngestReport,
};
use sisx_core::Dataset;
use sisx_service::handlers::{
    distribution_body, regression_report, rows_page, DatasetInfo, DerivedResponse, UploadResponse, MAX_PAGE,
};
use sisx_service::Config;

use crate::{Command, Failure, Io};

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<(Dataset, IngestReport), Failure> {
    Ok(ingest(&read(path)?, &ColumnSchema::sis_default(), &CleaningRules::default())?)
}

fn write_bytes(output: Option<&Path>, bytes: &[u8]) -> Outcome {
    let res = match output {
        Some(p) => std::fs::write(p, bytes).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => std::io::stdout().lock().write_all(bytes).map_err(|e| format!("cannot write output: {e}")),
    };
    res.map_err(Failure::Io)
}

/// Canonical JSON plus a trailing newline.
fn emit<T: Serialize + ?Sized>(output: Option<&Path>, value: &T) -> Outcome {
    let mut text = to_canonical_string(value)?;
    text.push('\n');
    write_bytes(output, text.as_bytes())
}

fn dataset(io: &Io) -> Result<Dataset, Failure> {
    load(&io.input).map(|(ds, _)| ds)
}

/// `COLUMN=VALUE` split at the first `=`.
fn key_value<'a>(raw: &'a str, flag: &str) -> Result<(&'a str, &'a str), Failure> {
    raw.split_once('=')
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| Failure::Usage(format!("--{flag} expects COLUMN=..., got {raw:?}")))
}

fn bound(raw: &str, whole: &str) -> Result<Option<u64>, Failure> {
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse()
        .map(Some)
        .map_err(|_| Failure::Usage(format!("--range bound {raw:?} in {whole:?} is not a nonnegative integer")))
}

fn filter_spec(spec: Option<&str>, equals: &[String], range: &[String]) -> Result<FilterSpec, Failure> {
    let mut fs = match spec {
        None => FilterSpec::default(),
        Some(s) => {
            let text = match s.strip_prefix('@') {
                Some(path) => read(Path::new(path))?,
                None => s.as_bytes().to_vec(),
            };
            serde_json::from_slice(&text).map_err(|e| Failure::Usage(format!("bad filter spec: {e}")))?
        }
    };
    for raw in equals {
        let (column, value) = key_value(raw, "equals")?;
        fs.clauses.push(Clause::Equals { column: column.into(), value: value.into() });
    }
    for raw in range {
        let (column, span) = key_value(raw, "range")?;
        let (lo, hi) =
            span.split_once("..").ok_or_else(|| Failure::Usage(format!("--range expects MIN..MAX, got {raw:?}")))?;
        fs.clauses.push(Clause::Range { column: column.into(), min: bound(lo, raw)?, max: bound(hi, raw)? });
    }
    Ok(fs)
}

/// What a fresh service answers when this derived dataset follows the upload.
fn derived(input: &Dataset, out: &Dataset) -> DerivedResponse {
    let parent = input.canonical_digest();
    let id = out.canonical_digest();
    let created = id != parent;
    DerivedResponse { parent: created.then_some(parent), id, created, row_count: out.row_count() }
}

fn serve(bind: Option<std::net::IpAddr>, port: Option<u16>, ui_dir: Option<std::path::PathBuf>) -> Outcome {
    let mut config = Config::from_env().map_err(Failure::Usage)?;
    config.bind = bind.unwrap_or(config.bind);
    config.port = port.unwrap_or(config.port);
    config.ui_dir = ui_dir.or(config.ui_dir);
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_ansi(!crate::no_color())
        .with_writer(std::io::stderr)
        .init();
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(format!("cannot start runtime: {e}")))?;
    rt.block_on(sisx_service::serve(config)).map_err(|e| Failure::Io(format!("service failed: {e}")))
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::SampleSize { population, confidence, margin, proportion, json } => {
            let params = SampleSizeParams::new(population, confidence, margin).with_proportion(proportion);
            let n = sample_size_detail(&params)?;
            if json {
                emit(None, &n)
            } else {
                write_bytes(None, format!("n = {}\nz = {}\n", n.n, n.z).as_bytes())
            }
        }
        Command::Ingest { io } => {
            let (ds, report) = load(&io.input)?;
            emit(io.output.as_deref(), &UploadResponse::new(&ds.canonical_digest(), true, &report))
        }
        Command::Info { io } => {
            let ds = dataset(&io)?;
            emit(io.output.as_deref(), &DatasetInfo::new(&ds.canonical_digest(), None, &ds))
        }
        Command::Rows { io, offset, limit } => {
            if limit == 0 || limit > MAX_PAGE {
                return Err(Failure::Usage(format!("--limit must be in 1..={MAX_PAGE}, got {limit}")));
            }
            emit(io.output.as_deref(), &rows_page(&dataset(&io)?, offset, limit))
        }
        Command::Sample { io, n, seed } => {
            let sample = draw_sample(&dataset(&io)?, n, seed)?;
            write_bytes(io.output.as_deref(), &sample.to_canonical_csv())
        }
        Command::Summary { io, distribution } => {
            let ds = dataset(&io)?;
            match distribution {
                Some(v) => emit(io.output.as_deref(), &distribution_body(&ds, &v)?),
                None => emit(io.output.as_deref(), &summarize(&ds)),
            }
        }
        Command::Filter { io, spec, equals, range, csv } => {
            let spec = filter_spec(spec.as_deref(), &equals, &range)?;
            let ds = dataset(&io)?;
            let out = filter(&ds, &spec)?;
            if let Some(path) = csv {
                write_bytes(Some(&path), &out.to_canonical_csv())?;
            }
            emit(io.output.as_deref(), &derived(&ds, &out))
        }
        Command::Fit { io, response, predictors, no_intercept, verbose } => {
            let defaults = ModelSpec::default();
            let mut spec =
                ModelSpec::new(response.unwrap_or(defaults.response), predictors.unwrap_or(defaults.predictors));
            if no_intercept {
                spec = spec.without_intercept();
            }
            let report = regression_report(&dataset(&io)?, &spec, verbose)?;
            emit(io.output.as_deref(), &report)?;
            // the table goes wherever the JSON does not
            let table = report.to_table();
            if io.output.is_some() {
                write_bytes(None, table.as_bytes())
            } else {
                eprint!("{table}");
                Ok(())
            }
        }
        Command::Density { io, variable, weighted, bandwidth } => {
            emit(io.output.as_deref(), &column_density(&dataset(&io)?, &variable, weighted, bandwidth)?)
        }
        Command::Regions { io, centroids } => {
            let table = match centroids {
                Some(p) => CentroidTable::from_json(&read(&p)?)?,
                None => CentroidTable::peru_departments(),
            };
            emit(io.output.as_deref(), &region_totals(&dataset(&io)?, &table)?)
        }
        Command::Correlation { io, variables } => {
            emit(io.output.as_deref(), &correlation_matrix(&dataset(&io)?, &variables)?)
        }
        Command::Scatter3d { io, x, y, z, max_points, seed } => {
            emit(io.output.as_deref(), &scatter3d_data(&dataset(&io)?, [&x, &y, &z], max_points, seed)?)
        }
        Command::Serve { bind, port, ui_dir } => serve(bind, port, ui_dir),
    }
}
