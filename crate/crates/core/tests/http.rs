use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use topoflow::fixtures;
use topoflow::kernel::{init_sim, SimConfig, TraceEvent};
use topoflow::model::Model;
use topoflow::server::router;

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(match body {
            Some(v) => Body::from(v.to_string()),
            None => Body::empty(),
        })
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes)
            .unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, Method::GET, uri, None).await
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, Method::POST, uri, Some(body)).await
}

#[tokio::test]
async fn empty_model_has_empty_views() {
    let app = router(Model::new());
    let (status, v) = get(&app, "/view?kind=merged").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["elements"], json!([]));
    assert_eq!(v["edges"], json!([]));
    let (status, v) = get(&app, "/lint").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v, json!([]));
    let (_, v) = get(&app, "/model").await;
    assert_eq!(v["next_id"], 1);
    assert_eq!(v["nodes"], json!([]));
}

#[tokio::test]
async fn view_query_parameters() {
    let m = fixtures::meeting();
    let stage = m.node_named("Select date").unwrap().0;
    let app = router(m);
    let (_, all) = get(&app, "/view?kind=process").await;
    let (_, some) = get(&app, "/view?kind=process&filter=Select*,Reserve*").await;
    assert!(some["elements"].as_array().unwrap().len() < all["elements"].as_array().unwrap().len());
    let names: Vec<&str> = some["elements"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    assert!(!names
        .iter()
        .any(|n| n.starts_with("Select") || n.starts_with("Reserve")));

    let (_, v) = get(&app, &format!("/view?highlight={stage}&show_stars=true")).await;
    assert_eq!(v["highlight"], json!([stage]));
    assert!(!v["stars"].as_array().unwrap().is_empty());

    let (status, v) = get(&app, "/view?kind=sideways").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"], "invalid");
    let (status, _) = get(&app, "/view?highlight=abc").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn step_matches_kernel_step() {
    let app = router(fixtures::education_evaluation());
    let (status, v) = post(&app, "/sim/init", json!({ "seed": 3 })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["tokens"], 2);
    assert_eq!(v["clock"], 0);

    let mut reference = init_sim(
        fixtures::education_evaluation(),
        SimConfig::default().with_seed(3),
    )
    .unwrap();
    loop {
        let expected = reference.step().unwrap();
        let (status, v) = post(&app, "/sim/step", json!({})).await;
        assert_eq!(status, StatusCode::OK);
        match expected {
            None => {
                assert_eq!(v["done"], true);
                assert_eq!(v["events"], json!([]));
                break;
            }
            Some(batch) => {
                assert_eq!(v["done"], false);
                let got: Vec<TraceEvent> = serde_json::from_value(v["events"].clone()).unwrap();
                assert_eq!(got, batch);
                assert_eq!(v["clock"], reference.clock());
                assert_eq!(v["pending"], reference.pending());
            }
        }
    }
}

#[tokio::test]
async fn run_until_and_resume() {
    let app = router(fixtures::meeting());
    post(&app, "/sim/init", json!({})).await;
    let (status, first) = post(&app, "/sim/run", json!({ "until": 1 })).await;
    assert_eq!(status, StatusCode::OK);
    assert!(first["pending"].as_u64().unwrap() > 0);
    let (_, rest) = call(&app, Method::POST, "/sim/run", None).await;
    assert_eq!(rest["pending"], 0);
    let n = first["events"].as_array().unwrap().len() + rest["events"].as_array().unwrap().len();
    let mut reference = init_sim(fixtures::meeting(), SimConfig::default()).unwrap();
    assert_eq!(n, reference.run(None).unwrap().len());
    assert_eq!(rest["clock"], 5);
}

#[tokio::test]
async fn inject_into_monitored_run() {
    let m = fixtures::studying();
    let bob = m.node_named("Bob").unwrap().0;
    let binding = m.flow_bindings().next().unwrap().0 .0;
    let app = router(m);
    let (_, v) = post(&app, "/sim/init", json!({ "monitored": true })).await;
    assert_eq!(v["pending"], 0);
    let event = json!({ "event": { "action": "create", "binding": binding, "identity": bob } });
    let (status, v) = post(&app, "/sim/inject", event).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["pending"], 1);
    let (_, v) = post(&app, "/sim/run", json!({})).await;
    let kinds: Vec<&str> = v["events"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds[0], "token_created");
    assert!(kinds.contains(&"token_entered"));

    let (status, v) = post(
        &app,
        "/sim/inject",
        json!({ "event": { "action": "fire", "token": 99, "arc": binding } }),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND, "{v}");
    let (status, _) = post(
        &app,
        "/sim/inject",
        json!({ "event": { "action": "teleport" } }),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn sim_errors_map_to_statuses() {
    let app = router(fixtures::meeting());
    let (status, v) = post(&app, "/sim/step", json!({})).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["error"], "conflict");

    let (status, _) = post(&app, "/sim/init", json!({ "max_events": 0 })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = post(&app, "/sim/init", json!({ "bogus": 1 })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    post(&app, "/sim/init", json!({ "max_events": 3 })).await;
    let (status, v) = post(&app, "/sim/run", json!({})).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert!(v["message"].as_str().unwrap().contains('3'));

    // A second binding on the entry arc is a flow conflict.
    let mut m = fixtures::plain_transition();
    let arc = m.arcs().next().unwrap().id;
    let other = m.add_node("Other", None).unwrap();
    let c = m.add_circle(other, "Other").unwrap();
    m.add_flow_binding(c, arc).unwrap();
    let app = router(m);
    let (status, _) = post(&app, "/sim/init", json!({})).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn add_and_delete_elements() {
    let app = router(Model::new());
    let (status, v) = post(
        &app,
        "/model/elements",
        json!({ "element": "node", "name": "Person" }),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    let person = v["id"].as_u64().unwrap();
    let (_, v) = post(
        &app,
        "/model/elements",
        json!({ "element": "circle", "owner": person, "name": "Person" }),
    )
    .await;
    let persons = v["id"].as_u64().unwrap();
    let (_, v) = post(
        &app,
        "/model/elements",
        json!({ "element": "node", "name": "Ann" }),
    )
    .await;
    let ann = v["id"].as_u64().unwrap();
    let (status, v) = post(
        &app,
        "/model/elements",
        json!({ "element": "star", "identity": ann, "circle": persons }),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    let star = v["id"].as_u64().unwrap();
    let (status, v) = post(
        &app,
        "/model/elements",
        json!({ "element": "relation", "kind": "association", "a": persons, "b": persons, "multiplicity": "0..1" }),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    assert!(v["findings"].is_array());

    // Same pair twice is rejected and leaves the model alone.
    let (status, v) = post(
        &app,
        "/model/elements",
        json!({ "element": "star", "identity": ann, "circle": persons }),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{v}");
    let (status, _) = post(
        &app,
        "/model/elements",
        json!({ "element": "arc", "from": 999, "to": person }),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = post(&app, "/model/elements", json!({ "element": "nonsense" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, v) = call(
        &app,
        Method::DELETE,
        &format!("/model/elements/{persons}"),
        None,
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let removed: Vec<u64> = serde_json::from_value(v["removed"].clone()).unwrap();
    assert!(removed.contains(&persons) && removed.contains(&star));
    let (status, _) = call(
        &app,
        Method::DELETE,
        &format!("/model/elements/{persons}"),
        None,
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, Method::DELETE, "/model/elements/xyz", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (_, model) = get(&app, "/model").await;
    assert_eq!(model["nodes"].as_array().unwrap().len(), 2);
    assert_eq!(model["stars"], json!([]));
}

#[tokio::test]
async fn edits_wait_for_a_running_sim() {
    let app = router(fixtures::meeting());
    post(&app, "/sim/init", json!({})).await;
    post(&app, "/sim/step", json!({})).await;
    let (status, _) = post(
        &app,
        "/model/elements",
        json!({ "element": "node", "name": "x" }),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
    post(&app, "/sim/run", json!({})).await;
    let (status, _) = post(
        &app,
        "/model/elements",
        json!({ "element": "node", "name": "x" }),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    // The edit discarded the finished run.
    let (status, _) = post(&app, "/sim/step", json!({})).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn services_are_bound_over_http() {
    let m = fixtures::meeting_chain();
    let stage = m.node_named("Propose date").unwrap().0;
    let app = router(m);
    let (_, v) = post(
        &app,
        "/model/elements",
        json!({ "element": "node", "name": "Boss" }),
    )
    .await;
    let boss = v["id"].as_u64().unwrap();
    let body = json!({ "element": "service", "pilot": boss, "target": stage, "instructions": [{ "op": "FORWARD" }] });
    let (status, v) = post(&app, "/model/elements", body.clone()).await;
    assert_eq!(
        status,
        StatusCode::BAD_REQUEST,
        "no pilot relation yet: {v}"
    );
    let (status, _) = post(
        &app,
        "/model/elements",
        json!({ "element": "relation", "kind": "pilot", "pilot": boss, "target": stage, "root": false }),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    let (status, _) = post(&app, "/model/elements", body).await;
    assert_eq!(status, StatusCode::CREATED);
    let (_, model) = get(&app, "/model").await;
    assert_eq!(
        model["services"][0]["instructions"],
        json!([{ "op": "FORWARD" }])
    );
}

/// Read SSE frames until `n` data lines have arrived.
async fn sse_events(app: &Router, n: usize) -> Vec<(String, String, Value)> {
    let req = Request::builder()
        .uri("/events")
        .body(Body::empty())
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(resp.headers()["content-type"], "text/event-stream");
    let mut body = resp.into_body();
    let mut text = String::new();
    let mut out = Vec::new();
    while out.len() < n {
        let frame = body.frame().await.expect("stream ended early").unwrap();
        if let Some(chunk) = frame.data_ref() {
            text.push_str(std::str::from_utf8(chunk).unwrap());
        }
        while let Some(end) = text.find("\n\n") {
            let block: String = text.drain(..end + 2).collect();
            let (mut event, mut id, mut data) = (String::new(), String::new(), None);
            for line in block.lines() {
                if let Some(v) = line.strip_prefix("event: ") {
                    event = v.into();
                } else if let Some(v) = line.strip_prefix("id: ") {
                    id = v.into();
                } else if let Some(v) = line.strip_prefix("data: ") {
                    data = Some(serde_json::from_str(v).unwrap());
                }
            }
            if let Some(d) = data {
                out.push((event, id, d));
            }
        }
    }
    out
}

#[tokio::test]
async fn event_stream_replays_the_trace() {
    let app = router(fixtures::meeting());
    post(&app, "/sim/init", json!({})).await;
    let (_, run) = post(&app, "/sim/run", json!({})).await;
    let expected = run["events"].as_array().unwrap().clone();
    let got = sse_events(&app, expected.len()).await;
    for ((event, id, data), want) in got.iter().zip(&expected) {
        assert_eq!(data, want);
        assert_eq!(event, want["kind"].as_str().unwrap());
        assert_eq!(id, &want["seq"].to_string());
    }
}

#[tokio::test]
async fn event_stream_carries_live_events() {
    let app = router(fixtures::plain_transition());
    post(&app, "/sim/init", json!({})).await;
    let reader = tokio::spawn({
        let app = app.clone();
        async move { sse_events(&app, 4).await }
    });
    tokio::time::sleep(std::time::Duration::from_millis(50)).await;
    post(&app, "/sim/run", json!({})).await;
    let got = tokio::time::timeout(std::time::Duration::from_secs(5), reader)
        .await
        .expect("stream delivered events")
        .unwrap();
    let kinds: Vec<&str> = got.iter().map(|(k, ..)| k.as_str()).collect();
    assert_eq!(
        kinds,
        [
            "token_created",
            "token_left",
            "star_destroyed",
            "star_created"
        ]
    );
}
