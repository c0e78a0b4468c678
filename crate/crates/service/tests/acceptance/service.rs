//! Every response is compared byte-for-byte with the canonical JSON of the
//! direct library call on a locally tracked copy of the registry state, and
//! each sequence is replayed on a fresh service to check determinism.

use std::collections::BTreeMap;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::{json, Value};
use sisx_core::density::column_density;
use sisx_core::json::to_canonical_string;
use sisx_core::regression::{correlation_matrix, fit_model, scatter3d_data, FitReport, ModelSpec};
use sisx_core::sampling::draw_sample;
use sisx_core::store::schema::{
    ColumnSchema, AGE, INEI_SCOPE, INSURANCE_PLAN, NATIONAL_FOREIGN, REGION, TOTAL_AFFILIATES,
};
use sisx_core::store::{
    aggregate_by, filter, ingest, region_totals, summarize, CentroidTable, Clause, CleaningRules, Column, FilterSpec,
};
use sisx_core::synth::{synthetic_csv, SynthModel, PLANS, REGIONS};
use sisx_core::{Dataset, Error};
use sisx_service::{router, ApiError, AppState, Config};
use tower::ServiceExt;

use crate::{Check, Outcome};

const SEQUENCES: usize = 50;
const PREDICTORS: [&str; 5] = [INSURANCE_PLAN, REGION, AGE, NATIONAL_FOREIGN, INEI_SCOPE];
const VARIABLES: [&str; 7] = [REGION, AGE, NATIONAL_FOREIGN, INEI_SCOPE, INSURANCE_PLAN, TOTAL_AFFILIATES, "NO_SUCH"];

struct Expected {
    status: StatusCode,
    body: String,
}

fn canon<T: Serialize + ?Sized>(v: &T) -> String {
    to_canonical_string(v).unwrap()
}

fn ok<T: Serialize>(v: &T) -> Expected {
    Expected { status: StatusCode::OK, body: canon(v) }
}

fn engine_err(e: &Error) -> Expected {
    let api = ApiError::engine(e);
    Expected { status: api.status, body: canon(&api.body()) }
}

fn from<T: Serialize>(r: sisx_core::Result<T>) -> Expected {
    match r {
        Ok(v) => ok(&v),
        Err(e) => engine_err(&e),
    }
}

/// Registry contents as the harness believes them to be.
#[derive(Default)]
struct Model {
    datasets: BTreeMap<String, (Dataset, Option<String>)>,
}

impl Model {
    fn register(&mut self, ds: Dataset, parent: &str) -> Expected {
        let id = ds.canonical_digest();
        let created = !self.datasets.contains_key(&id);
        let rows = ds.row_count();
        self.datasets.entry(id.clone()).or_insert((ds, Some(parent.to_string())));
        let parent = self.datasets[&id].1.clone();
        let body = json!({"id": id, "parent": parent, "created": created, "row_count": rows});
        Expected { status: if created { StatusCode::CREATED } else { StatusCode::OK }, body: canon(&body) }
    }
}

enum Step {
    Get(String),
    Post(String, String),
}

fn random_filter(rng: &mut StdRng) -> FilterSpec {
    let mut clauses = Vec::new();
    for _ in 0..rng.random_range(0..3) {
        clauses.push(match rng.random_range(0..4) {
            0 => Clause::Equals { column: REGION.into(), value: REGIONS[rng.random_range(0..REGIONS.len())].into() },
            1 => Clause::InSet {
                column: INSURANCE_PLAN.into(),
                values: (0..rng.random_range(1..4))
                    .map(|_| PLANS[rng.random_range(0..PLANS.len())].to_string())
                    .collect(),
            },
            2 => {
                let lo = rng.random_range(0..80);
                Clause::Range {
                    column: AGE.into(),
                    min: Some(lo),
                    max: rng.random_bool(0.5).then(|| lo + rng.random_range(0..40)),
                }
            }
            // invalid pairing: a range on a categorical
            _ => Clause::Range { column: INEI_SCOPE.into(), min: Some(1), max: None },
        });
    }
    FilterSpec::new(clauses)
}

fn page(ds: &Dataset, offset: usize, limit: usize) -> Value {
    let total = ds.row_count();
    let start = offset.min(total);
    let end = (start + limit).min(total);
    let rows: Vec<Value> = (start..end)
        .map(|r| {
            ds.columns()
                .map(|(_, c)| match c {
                    Column::Categorical(cat) => json!(cat.value(r)),
                    Column::Integer(v) => json!(v[r]),
                })
                .collect()
        })
        .collect();
    let names: Vec<&str> = ds.column_names().collect();
    json!({"columns": names, "offset": start, "limit": limit, "total": total, "rows": rows})
}

fn info(id: &str, parent: Option<&String>, ds: &Dataset) -> Value {
    let columns: Vec<Value> = ds
        .columns()
        .map(|(s, c)| match c {
            Column::Categorical(cat) => json!({"name": s.name, "kind": "categorical", "levels": cat.levels().len()}),
            Column::Integer(_) => json!({"name": s.name, "kind": "nonnegative_integer"}),
        })
        .collect();
    json!({"id": id, "parent": parent, "row_count": ds.row_count(), "total_affiliates": ds.total_affiliates(), "columns": columns})
}

/// Picks the next request and its expected response from the model state.
fn next_step(rng: &mut StdRng, model: &mut Model) -> (Step, Expected) {
    let ids: Vec<String> = model.datasets.keys().cloned().collect();
    let id = ids[rng.random_range(0..ids.len())].clone();
    let (ds, parent) = model.datasets[&id].clone();
    let base = format!("/datasets/{id}");
    match rng.random_range(0..13) {
        0 => (Step::Get(format!("{base}/summary")), ok(&summarize(&ds))),
        1 => {
            let v = VARIABLES[rng.random_range(0..VARIABLES.len())];
            let expected = from(aggregate_by(&ds, v).map(|levels| json!({"variable": v, "levels": levels})));
            (Step::Get(format!("{base}/distribution?variable={v}")), expected)
        }
        2 => {
            let spec = random_filter(rng);
            let body = serde_json::to_string(&spec).unwrap();
            let expected = match filter(&ds, &spec) {
                Ok(d) => model.register(d, &id),
                Err(e) => engine_err(&e),
            };
            (Step::Post(format!("{base}/filter"), body), expected)
        }
        3 => {
            let n = rng.random_range(1..=ds.row_count() + 2);
            let seed: u64 = rng.random_range(0..1000);
            let expected = match draw_sample(&ds, n, seed) {
                Ok(d) => model.register(d, &id),
                Err(e) => engine_err(&e),
            };
            (Step::Post(format!("{base}/sample"), json!({"n": n, "seed": seed}).to_string()), expected)
        }
        4 => (Step::Get(format!("{base}/regions")), from(region_totals(&ds, &CentroidTable::peru_departments()))),
        5 | 6 => {
            let predictors: Vec<&str> = PREDICTORS.iter().copied().filter(|_| rng.random_bool(0.7)).collect();
            let mut spec = ModelSpec::new(TOTAL_AFFILIATES, predictors);
            if rng.random_bool(0.15) {
                spec = spec.without_intercept();
            }
            let verbose = rng.random_bool(0.3);
            let expected = from(fit_model(&ds, &spec).and_then(|fit| FitReport::new(&fit, TOTAL_AFFILIATES, verbose)));
            let uri = if verbose { format!("{base}/regression?verbose=true") } else { format!("{base}/regression") };
            (Step::Post(uri, serde_json::to_string(&spec).unwrap()), expected)
        }
        7 => {
            let v = [AGE, TOTAL_AFFILIATES, REGION][rng.random_range(0..3)];
            let weighted = rng.random_bool(0.5);
            let bw = rng.random_bool(0.3).then(|| rng.random_range(1..20) as f64 / 4.0);
            let mut uri = format!("{base}/density?variable={v}&weighted={weighted}");
            if let Some(b) = bw {
                uri.push_str(&format!("&bandwidth={b}"));
            }
            (Step::Get(uri), from(column_density(&ds, v, weighted, bw)))
        }
        8 => {
            let offset = rng.random_range(0..ds.row_count() + 5);
            let limit = rng.random_range(1..50);
            (Step::Get(format!("{base}/rows?offset={offset}&limit={limit}")), ok(&page(&ds, offset, limit)))
        }
        9 => {
            let vars: Vec<String> =
                VARIABLES[..6].iter().filter(|_| rng.random_bool(0.5)).map(|s| s.to_string()).collect();
            let vars = if vars.is_empty() { vec![AGE.to_string()] } else { vars };
            let uri = format!("{base}/correlation?variables={}", vars.join(","));
            (Step::Get(uri), from(correlation_matrix(&ds, &vars)))
        }
        10 => {
            let axes = [AGE, INSURANCE_PLAN, TOTAL_AFFILIATES, REGION];
            let (x, y, z) = (axes[rng.random_range(0..4)], axes[rng.random_range(0..4)], axes[rng.random_range(0..4)]);
            let max_points = rng.random_range(1..300);
            let seed: u64 = rng.random_range(0..50);
            let uri = format!("{base}/scatter3d?x={x}&y={y}&z={z}&max_points={max_points}&seed={seed}");
            (Step::Get(uri), from(scatter3d_data(&ds, [x, y, z], max_points, seed)))
        }
        11 => (Step::Get(base.clone()), ok(&info(&id, parent.as_ref(), &ds))),
        _ => {
            let bogus = format!("{:064x}", rng.random::<u64>());
            let api = ApiError::not_found(&bogus);
            (Step::Get(format!("/datasets/{bogus}/summary")), Expected { status: api.status, body: canon(&api.body()) })
        }
    }
}

async fn send(app: &Router, step: &Step) -> (StatusCode, String) {
    let (method, uri, body) = match step {
        Step::Get(u) => (Method::GET, u.clone(), Body::empty()),
        Step::Post(u, b) => (Method::POST, u.clone(), Body::from(b.clone())),
    };
    let req = Request::builder().method(method).uri(uri).body(body).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

/// Runs one sequence and returns the raw responses.
async fn sequence(seed: u64, c: &mut Check) -> Vec<(StatusCode, String)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let app = router(AppState::new(&Config::default(), CentroidTable::peru_departments()), None);
    let csv = synthetic_csv(rng.random_range(30..400), rng.random(), &SynthModel::default());
    let (ds, report) = ingest(&csv, &ColumnSchema::sis_default(), &CleaningRules::default()).unwrap();
    let id = ds.canonical_digest();
    let upload = sisx_service::handlers::UploadResponse::new(&id, true, &report);
    let mut responses = Vec::new();
    let step = Step::Post("/datasets".into(), String::from_utf8(csv).unwrap());
    let got = send(&app, &step).await;
    c.require(got == (StatusCode::CREATED, canon(&upload)), || format!("seq {seed}: upload response {got:?}"));
    responses.push(got);

    let mut model = Model::default();
    model.datasets.insert(id, (ds, None));
    for i in 0..rng.random_range(5..15) {
        let (step, expected) = next_step(&mut rng, &mut model);
        let got = send(&app, &step).await;
        let uri = match &step {
            Step::Get(u) | Step::Post(u, _) => u.clone(),
        };
        c.require(got.0 == expected.status && got.1 == expected.body, || {
            let shown: String = got.1.chars().take(160).collect();
            format!("seq {seed} step {i} {uri}: got {} {shown}, expected {}", got.0, expected.status)
        });
        responses.push(got);
    }
    responses
}

pub fn run() -> Outcome {
    let mut c = Check::default();
    let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
    let mut requests = 0;
    let mut statuses: BTreeMap<u16, usize> = BTreeMap::new();
    for s in 0..SEQUENCES {
        let seed = 0xd1ff_0000 + s as u64;
        let first = rt.block_on(sequence(seed, &mut c));
        let mut replay_check = Check::default();
        let second = rt.block_on(sequence(seed, &mut replay_check));
        c.require(first == second, || format!("seq {seed}: replay differs"));
        requests += first.len();
        for (st, _) in &first {
            *statuses.entry(st.as_u16()).or_insert(0) += 1;
        }
    }
    let mix: Vec<String> = statuses.iter().map(|(k, v)| format!("{k}: {v}")).collect();
    c.note(format!("{SEQUENCES} sequences, {requests} requests, each replayed; statuses {}", mix.join(", ")));
    c.done()
}
