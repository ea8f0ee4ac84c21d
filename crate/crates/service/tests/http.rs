mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use qmoves_core::level::reference_path;
use qmoves_service::http::router;
use qmoves_service::{ExperimentCell, GameService, LevelsMode};

use common::*;

async fn call(
    svc: &Arc<GameService>,
    method: Method,
    uri: &str,
    body: Option<Value>,
) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = router(svc.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    // axum's own extractor rejections are plain text
    let value = serde_json::from_slice(&bytes)
        .unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value)
}

fn samples(id: &str) -> Value {
    serde_json::to_value(reference_path(id).unwrap().samples()).unwrap()
}

fn frames(id: &str, stride: usize) -> usize {
    ((reference_path(id).unwrap().duration() / 1e-4).round() as usize).div_ceil(stride) + 1
}

fn still_samples(x0: f64, duration: f64) -> Value {
    json!([{ "t": 0.0, "x0": x0, "depth": 160.0 }, { "t": duration, "x0": x0, "depth": 160.0 }])
}

#[tokio::test]
async fn health_and_levels() {
    let svc = Arc::new(service(1));
    let (s, v) = call(&svc, Method::GET, "/v1/health", None).await;
    assert_eq!((s, v), (StatusCode::OK, json!({ "status": "ok" })));

    let (s, v) = call(&svc, Method::GET, "/v1/levels", None).await;
    assert_eq!(s, StatusCode::OK);
    let levels = v.as_array().unwrap();
    assert_eq!(levels.len(), 27);
    assert!(levels.iter().all(|l| l.get("unlocked").is_none()));

    let (s, v) = call(&svc, Method::GET, "/v1/levels/tutorial_1", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["id"], "tutorial_1");
    assert!(v["text"].as_str().unwrap().starts_with("qmlevel 1"));
    assert_eq!(v["level"]["duration_max"], 1.0);

    let (s, v) = call(&svc, Method::GET, "/v1/levels/nope", None).await;
    assert_eq!(
        (s, v["kind"].as_str()),
        (StatusCode::NOT_FOUND, Some("not_found"))
    );
    let (s, _) = call(&svc, Method::GET, "/v2/health", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn users_register_and_conflict() {
    let svc = Arc::new(service(1));
    let (s, v) = call(
        &svc,
        Method::POST,
        "/v1/users",
        Some(json!({ "name": "ada", "origin": "online_media" })),
    )
    .await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v["origin"], "online_media");
    let id = v["user_id"].as_str().unwrap().to_string();

    let (s, v) = call(&svc, Method::GET, &format!("/v1/users/{id}"), None).await;
    assert_eq!((s, v["name"].as_str()), (StatusCode::OK, Some("ada")));

    let (s, v) = call(
        &svc,
        Method::POST,
        "/v1/users",
        Some(json!({ "name": "ada" })),
    )
    .await;
    assert_eq!(
        (s, v["kind"].as_str()),
        (StatusCode::CONFLICT, Some("conflict"))
    );
    let (s, _) = call(
        &svc,
        Method::POST,
        "/v1/users",
        Some(json!({ "name": "bob", "origin": "carrier_pigeon" })),
    )
    .await;
    assert!(s.is_client_error());
    let (s, _) = call(&svc, Method::GET, "/v1/users/u99", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let (s, v) = call(&svc, Method::GET, &format!("/v1/levels?user={id}"), None).await;
    assert_eq!(s, StatusCode::OK);
    let open = v
        .as_array()
        .unwrap()
        .iter()
        .filter(|l| l["unlocked"] == true)
        .count();
    assert!(open == 1 || open == 27, "{open}");
}

#[tokio::test]
async fn plays_boards_replays() {
    let svc = Arc::new(service(3));
    let user = register_in(&svc, "p", ExperimentCell::ALL[0]);
    assert_eq!(user.cell.levels, LevelsMode::Locked);
    let uid = user.user_id.clone();

    let body = json!({ "user_id": uid, "level_id": "tutorial_1", "client_version": "web-1", "samples": samples("tutorial_1") });
    let (s, v) = call(&svc, Method::POST, "/v1/plays", Some(body)).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v["report"]["stars"].as_u64().unwrap() >= 1);
    assert_eq!(v["personal_best"], true);
    assert_eq!(v["new_unlocks"], json!(["tutorial_2"]));
    let play_id = v["play_id"].as_u64().unwrap();

    let (s, v) = call(&svc, Method::GET, &format!("/v1/plays/{play_id}"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["record"]["path"]["samples"], samples("tutorial_1"));
    assert_eq!(v["record"]["client_version"], "web-1");

    let (s, v) = call(
        &svc,
        Method::GET,
        &format!("/v1/plays/{play_id}/replay?stride=1000"),
        None,
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(
        v["frames"].as_array().unwrap().len(),
        frames("tutorial_1", 1000)
    );
    assert_eq!(v["frames"][0]["density"].as_array().unwrap().len(), 256);

    let locked =
        json!({ "user_id": uid, "level_id": "tutorial_3", "samples": still_samples(0.5, 0.01) });
    let (s, v) = call(&svc, Method::POST, "/v1/plays", Some(locked)).await;
    assert_eq!(
        (s, &v["missing"]),
        (StatusCode::FORBIDDEN, &json!(["tutorial_2"]))
    );

    let bad = json!({ "user_id": uid, "level_id": "tutorial_1", "samples": [{ "t": 0.0, "x0": 0.0, "depth": 160.0 }, { "t": 0.0, "x0": 0.1, "depth": 160.0 }] });
    let (s, v) = call(&svc, Method::POST, "/v1/plays", Some(bad)).await;
    assert_eq!(
        (s, v["kind"].as_str()),
        (StatusCode::BAD_REQUEST, Some("invalid"))
    );
    let too_deep = json!({ "user_id": uid, "level_id": "tutorial_1", "samples": [{ "t": 0.0, "x0": -0.3, "depth": 999.0 }] });
    let (s, _) = call(&svc, Method::POST, "/v1/plays", Some(too_deep)).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let (s, v) = call(
        &svc,
        Method::GET,
        &format!("/v1/leaderboards/tutorial_1?around={uid}&window=3"),
        None,
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!(v[0]["rank"], 1);
    let (s, _) = call(&svc, Method::GET, "/v1/leaderboards/nope", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&svc, Method::GET, "/v1/plays/99", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let (s, v) = call(&svc, Method::GET, "/v1/metrics", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["total_plays"], 1);
}

#[tokio::test]
async fn preview_matches_scoring() {
    let svc = Arc::new(service(3));
    let body =
        json!({ "level_id": "tutorial_1", "samples": samples("tutorial_1"), "stride": 2500 });
    let (s, v) = call(&svc, Method::POST, "/v1/preview", Some(body)).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["play_id"], Value::Null);
    assert_eq!(
        v["frames"].as_array().unwrap().len(),
        frames("tutorial_1", 2500)
    );
    let direct = svc
        .prepared("tutorial_1")
        .unwrap()
        .score(&reference_path("tutorial_1").unwrap())
        .unwrap();
    assert_eq!(v["report"]["total_score"], direct.total_score);
    assert!(svc.plays().is_empty());
}

#[tokio::test]
async fn fine_tune_edits() {
    let svc = Arc::new(service(3));
    let path = json!([
        { "t": 0.0, "x0": -0.3, "depth": 160.0 },
        { "t": 0.1, "x0": 0.0, "depth": 160.0 },
        { "t": 0.2, "x0": 0.3, "depth": 160.0 }
    ]);
    let (s, v) = call(
        &svc,
        Method::POST,
        "/v1/paths/edit",
        Some(json!({ "samples": path, "op": "stretch", "factor": 2.0 })),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["origin"], "edited");
    assert_eq!(v["samples"][2]["t"], 0.4);

    let (s, v) = call(
        &svc,
        Method::POST,
        "/v1/paths/edit",
        Some(json!({ "samples": path, "op": "smooth", "window": 3, "locks": [[0.0, 0.2]] })),
    )
    .await;
    assert_eq!((s, &v["samples"]), (StatusCode::OK, &path));

    let moved = json!({ "samples": path, "op": "move_point", "level_id": "tutorial_1", "index": 1, "sample": { "t": 0.1, "x0": 0.05, "depth": 120.0 } });
    let (s, v) = call(&svc, Method::POST, "/v1/paths/edit", Some(moved)).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(
        v["samples"][1],
        json!({ "t": 0.1, "x0": 0.05, "depth": 120.0 })
    );

    let (s, v) = call(
        &svc,
        Method::POST,
        "/v1/paths/edit",
        Some(json!({ "samples": path, "op": "resample", "rate": 20.0 })),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["samples"].as_array().unwrap().len(), 5);

    let (s, _) = call(
        &svc,
        Method::POST,
        "/v1/paths/edit",
        Some(json!({ "samples": path, "op": "smooth", "window": 2 })),
    )
    .await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(
        &svc,
        Method::POST,
        "/v1/paths/edit",
        Some(json!({ "samples": path, "op": "twirl" })),
    )
    .await;
    assert!(s.is_client_error());
}

#[tokio::test]
async fn serve_shuts_down_and_syncs() {
    let dir = tempfile::tempdir().unwrap();
    let svc = Arc::new(GameService::open(dir.path(), 1).unwrap());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(qmoves_service::http::serve(listener, svc.clone(), async {
        rx.await.ok();
    }));
    svc.register_user("kept", qmoves_service::Origin::Unknown)
        .unwrap();
    tx.send(()).unwrap();
    server.await.unwrap().unwrap();
    drop(svc);
    let reopened = GameService::open(dir.path(), 1).unwrap();
    assert_eq!(reopened.users()[0].name, "kept");
}
