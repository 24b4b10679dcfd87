use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use handkin::builtin;
use handkin_server::{router, AppState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    router(Arc::new(AppState::builtin()))
}

async fn send(req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let res = app().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn get(uri: &str) -> (StatusCode, Value) {
    let (status, bytes) = send(Request::get(uri).body(Body::empty()).unwrap()).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

async fn post(uri: &str, body: Value) -> (StatusCode, Value) {
    let req = Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let (status, bytes) = send(req).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn pose_of(id: &str) -> Value {
    json!(builtin::gesture_set().find(id).unwrap().pose)
}

#[tokio::test]
async fn hand_spec_is_served_verbatim() {
    let (status, first) = send(Request::get("/api/hand-spec").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(first, builtin::HAND_SPEC_JSON.as_bytes());
    let (_, second) = send(Request::get("/api/hand-spec").body(Body::empty()).unwrap()).await;
    assert_eq!(first, second);
    let doc: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(doc["joints"].as_array().unwrap().len(), 20);
}

#[tokio::test]
async fn gesture_listing() {
    let (status, all) = get("/api/gestures").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(all["gestures"].as_array().unwrap().len(), 62);

    let (_, feix) = get("/api/gestures?category=FeixGrasp").await;
    assert_eq!(feix["gestures"].as_array().unwrap().len(), 33);
    let (_, kapandji) = get("/api/gestures?category=Kapandji").await;
    assert_eq!(kapandji["gestures"].as_array().unwrap().len(), 11);

    let (status, err) = get("/api/gestures?category=Grips").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["code"], "invalid_category");
}

#[tokio::test]
async fn gesture_lookup() {
    let (status, tripod) = get("/api/gestures/tripod").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(tripod["name"], "Tripod");
    assert_eq!(tripod["pose"], pose_of("tripod"));

    let (status, err) = get("/api/gestures/tripd").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["code"], "not_found");
    assert_eq!(err["details"]["suggestions"][0], "tripod");

    let (status, err) = get("/api/gestures/nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(err["details"]["suggestions"].is_array());
}

#[tokio::test]
async fn interpolation() {
    let (status, same) = post(
        "/api/interpolate",
        json!({"from": "tripod", "to": "tripod", "T": 5}),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let frames = same["frames"].as_array().unwrap();
    assert_eq!(frames.len(), 5);
    assert!(frames.iter().all(|f| *f == pose_of("tripod")));

    let (_, body) = post(
        "/api/interpolate",
        json!({"from": "palmar_pinch", "to": pose_of("tripod"), "T": 10}),
    )
    .await;
    let frames = body["frames"].as_array().unwrap();
    assert_eq!(frames.len(), 10);
    assert_eq!(frames[9], pose_of("tripod"));
    assert_eq!(body["validation"].as_array().unwrap().len(), 10);

    let (status, err) = post(
        "/api/interpolate",
        json!({"from": "tripod", "to": "tripod", "T": 0}),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["code"], "invalid_interval");

    let (status, err) = post(
        "/api/interpolate",
        json!({"from": "nope", "to": "tripod", "T": 3}),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["details"]["id"], "nope");
}

#[tokio::test]
async fn compile_pen_rotation() {
    let script: Value = serde_json::from_str(builtin::SCRIPTS[0].1).unwrap();
    let (status, body) = post("/api/compile", json!({ "script": script })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["trajectory"]["frames"].as_array().unwrap().len(), 41);
    assert_eq!(
        body["trajectory"]["key_frame_indices"],
        json!([0, 10, 20, 30, 40])
    );
    assert_eq!(body["metrics"]["gesture_count"], 5);
    assert_eq!(body["metrics"]["duration_s"], 20.0);
    assert_eq!(body["validation"]["rom_violations"], json!([]));
}

#[tokio::test]
async fn compile_unknown_gesture() {
    let script = json!({
        "name": "bad",
        "frame_rate_fps": 2.0,
        "key_frames": [{"gesture": "tripod"}, {"gesture": "nope", "interval_frames": 4}]
    });
    let (status, err) = post("/api/compile", json!({ "script": script })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["code"], "compile_error");
    assert_eq!(err["details"]["id"], "nope");
    assert!(err["message"].as_str().unwrap().contains("nope"));
}

#[tokio::test]
async fn malformed_body_uses_envelope() {
    let (status, err) = post("/api/compile", json!({ "scrip": {} })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(err["code"].is_string() && err["message"].is_string());
    assert!(err.get("details").is_some());
}

#[tokio::test]
async fn fk_zero_pose() {
    let (status, body) = post("/api/fk", json!({ "pose": handkin::HandPose::zero() })).await;
    assert_eq!(status, StatusCode::OK);
    let digits = body["digits"].as_array().unwrap();
    assert_eq!(digits.len(), 5);
    let index = digits.iter().find(|d| d["digit"] == "Index").unwrap();
    let points = index["points"].as_array().unwrap();
    assert_eq!(points.len(), 5);
    let tip: Vec<f64> = points[4]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!((tip[0] - 93.0).abs() < 1e-9 && tip[1] == 0.0 && tip[2] == 0.0);
}

#[tokio::test]
async fn cors_headers_present() {
    let req = Request::get("/api/gestures/tripod")
        .header("origin", "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let res = app().oneshot(req).await.unwrap();
    assert!(res.headers().contains_key("access-control-allow-origin"));
}

#[tokio::test]
async fn listener_serves_after_bind() {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    // Nothing listens until the state is built and serve binds.
    assert!(tokio::net::TcpStream::connect(addr).await.is_err());
    tokio::spawn(handkin_server::serve(AppState::builtin(), addr));
    let mut connected = false;
    for _ in 0..100 {
        if tokio::net::TcpStream::connect(addr).await.is_ok() {
            connected = true;
            break;
        }
        tokio::time::sleep(std::time::Duration::from_millis(20)).await;
    }
    assert!(connected);
}
