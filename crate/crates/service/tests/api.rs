use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use ifvc::interact::Session;
use ifvc::stream::encode_stream;
use ifvc::synth::{portrait, talking_head, TalkingHead};
use ifvc::{CodedStream, EncodeParams, MorphableModel, PreviewFrame};
use ifvc_service::api::{router, AppState};

const W: u16 = 96;
const H: u16 = 80;

fn stream() -> CodedStream {
    let trace = talking_head(&TalkingHead {
        frames: 40,
        ..TalkingHead::default()
    });
    let key = portrait(W.into(), H.into()).to_png().unwrap();
    let params = EncodeParams {
        width: W,
        height: H,
        model_id: "synthetic-100".into(),
        ..EncodeParams::default()
    };
    encode_stream(&trace, &key, &params).unwrap()
}

fn app() -> Router {
    let session = Session::from_stream(stream()).unwrap();
    router(AppState::shared(session, MorphableModel::synthetic()))
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let body = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, body)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Vec<u8>) {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn get_json(app: &Router, uri: &str) -> Value {
    let (status, body) = get(app, uri).await;
    assert_eq!(
        status,
        StatusCode::OK,
        "{uri}: {}",
        String::from_utf8_lossy(&body)
    );
    serde_json::from_slice(&body).unwrap()
}

async fn post_json(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    let req = Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let (status, body) = send(app, req).await;
    (status, serde_json::from_slice(&body).unwrap_or(Value::Null))
}

async fn delete(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (status, body) = send(app, Request::delete(uri).body(Body::empty()).unwrap()).await;
    (status, serde_json::from_slice(&body).unwrap_or(Value::Null))
}

fn multipart(parts: &[(&str, &[u8])]) -> Request<Body> {
    let boundary = "ifvc-test-boundary";
    let mut body = Vec::new();
    for (name, data) in parts {
        body.extend_from_slice(format!("--{boundary}\r\n").as_bytes());
        body.extend_from_slice(
            format!("Content-Disposition: form-data; name=\"{name}\"; filename=\"{name}\"\r\n\r\n")
                .as_bytes(),
        );
        body.extend_from_slice(data);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{boundary}--\r\n").as_bytes());
    Request::post("/key")
        .header(
            "content-type",
            format!("multipart/form-data; boundary={boundary}"),
        )
        .body(Body::from(body))
        .unwrap()
}

fn yaw(v: &Value) -> f64 {
    v["values"]["rot_1"].as_f64().unwrap()
}

#[tokio::test]
async fn meta_describes_stream() {
    let app = app();
    let meta = get_json(&app, "/meta").await;
    assert_eq!(meta["frame_count"], 40);
    assert_eq!(meta["header"]["width"], W);
    assert_eq!(meta["header"]["model_id"], "synthetic-100");
    assert_eq!(meta["key_source"], "stream");
    assert_eq!(meta["components"].as_array().unwrap().len(), 14);
    assert_eq!(meta["components"][8], "rot_1");
    assert!(meta["kbps"].as_f64().unwrap() < 5.0);
}

#[tokio::test]
async fn semantics_and_missing_frames() {
    let app = app();
    let s = get_json(&app, "/frames/3/semantics").await;
    assert_eq!(s["frame"], 3);
    assert_eq!(s["vector"].as_array().unwrap().len(), 14);
    assert_eq!(s["values"]["rot_1"], s["vector"][8]);
    let (status, body) = get(&app, "/frames/40/semantics").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let err: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(err["error"], "range");
    let (status, _) = get(&app, "/frames/x/semantics").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn edit_offset_and_undo() {
    let app = app();
    let before: Vec<Value> = all_semantics(&app, 0..40).await;
    let (status, added) = post_json(
        &app,
        "/edits",
        json!({"frames": [10, 20], "target": "rot_1", "mode": "offset", "value": 0.2}),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(added["index"], 0);
    let after = all_semantics(&app, 0..40).await;
    for l in 0..40 {
        let (a, b) = (&before[l]["vector"], &after[l]["vector"]);
        for c in 0..14 {
            let (x, y) = (a[c].as_f64().unwrap(), b[c].as_f64().unwrap());
            if c == 8 && (10..=20).contains(&l) {
                assert!((y - x - 0.2).abs() < 1e-12, "frame {l}");
            } else {
                assert_eq!(x.to_bits(), y.to_bits(), "frame {l} component {c}");
            }
        }
    }
    assert_eq!(get_json(&app, "/edits").await.as_array().unwrap().len(), 1);

    let (status, removed) = delete(&app, "/edits/0").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(removed["removed"]["target"], "rot_1");
    assert_eq!(all_semantics(&app, 0..40).await, before);
    let (status, _) = delete(&app, "/edits/0").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

async fn all_semantics(app: &Router, frames: std::ops::Range<usize>) -> Vec<Value> {
    let mut out = Vec::new();
    for l in frames {
        out.push(get_json(app, &format!("/frames/{l}/semantics")).await);
    }
    out
}

#[tokio::test]
async fn rejected_edits_change_nothing() {
    let app = app();
    let s0 = get_json(&app, "/frames/39/semantics").await;
    let (status, err) = post_json(
        &app,
        "/edits",
        json!({"frames": [30, 40], "target": "loc", "mode": "set", "value": 1.0}),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["error"], "range");
    let (status, _) = post_json(
        &app,
        "/edits",
        json!({"frames": "all", "target": "nose_1", "mode": "set", "value": 1.0}),
    )
    .await;
    assert!(status.is_client_error());
    assert_eq!(get_json(&app, "/frames/39/semantics").await, s0);
    assert!(get_json(&app, "/edits").await.as_array().unwrap().is_empty());
}

#[tokio::test]
async fn closed_eyes_everywhere() {
    let app = app();
    let (status, _) = post_json(
        &app,
        "/edits",
        json!({"frames": "all", "target": "eye", "mode": "set", "value": 5.0}),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    for l in [0, 7, 39] {
        let s = get_json(&app, &format!("/frames/{l}/semantics")).await;
        assert_eq!(s["values"]["eye"], 5.0);
        let mesh = get_json(&app, &format!("/frames/{l}/mesh")).await;
        for side in ["left", "right"] {
            let eye = &mesh["eyes"][side];
            assert!(eye["gap"].as_f64().unwrap().abs() < 1e-9, "frame {l} {side}");
            assert!(eye["polygon"].as_array().unwrap().is_empty());
        }
    }
}

#[tokio::test]
async fn mesh_shape() {
    let app = app();
    let mesh = get_json(&app, "/frames/0/mesh").await;
    assert_eq!(mesh["vertices"].as_array().unwrap().len(), 100);
    assert_eq!(mesh["triangles"].as_array().unwrap().len(), 162);
    assert_eq!(mesh["width"], W);
    assert!(mesh["visible"].as_array().unwrap().iter().all(|v| v == true));
    assert_eq!(mesh["eyes"]["left"]["polygon"].as_array().unwrap().len(), 4);
}

#[tokio::test]
async fn previews_are_png_and_deterministic() {
    let app = app();
    let (status, a) = get(&app, "/frames/12/preview.png").await;
    assert_eq!(status, StatusCode::OK);
    let frame = PreviewFrame::decode(&a).unwrap();
    assert_eq!((frame.width, frame.height), (W.into(), H.into()));
    let (_, b) = get(&app, "/frames/12/preview.png").await;
    assert_eq!(a, b);
    let (status, wf) = get(&app, "/frames/12/preview.png?view=wireframe").await;
    assert_eq!(status, StatusCode::OK);
    assert_ne!(wf, a);
    let (status, _) = get(&app, "/frames/12/preview.png?view=sketch").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn key_substitution() {
    let app = app();
    let (_, original) = get(&app, "/frames/9/preview.png").await;

    // Same portrait as the stream's key: previews must not change.
    let same = portrait(W.into(), H.into()).to_png().unwrap();
    let (status, _) = send(&app, multipart(&[("image", &same)])).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(get_json(&app, "/meta").await["key_source"], "virtual");
    assert_eq!(get(&app, "/frames/9/preview.png").await.1, original);

    let other = PreviewFrame::from_fn(W.into(), H.into(), |x, y| [(x * 2) as u8, (y * 3) as u8, 90]);
    let semantics = json!({"id": [0.5, -0.3], "exp": [0.1]});
    let (status, body) = send(
        &app,
        multipart(&[
            ("image", &other.to_png().unwrap()),
            ("semantics", semantics.to_string().as_bytes()),
        ]),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&body));
    assert_ne!(get(&app, "/frames/9/preview.png").await.1, original);

    let small = PreviewFrame::blank(10, 10).to_png().unwrap();
    let (status, body) = send(&app, multipart(&[("image", &small)])).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(
        serde_json::from_slice::<Value>(&body).unwrap()["error"],
        "dimension"
    );
    let (status, _) = send(&app, multipart(&[("semantics", b"{}")])).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, _) = delete(&app, "/key").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(get(&app, "/frames/9/preview.png").await.1, original);
}

#[tokio::test]
async fn export_round_trip() {
    let app = app();
    post_json(
        &app,
        "/edits",
        json!({"frames": [5, 8], "target": "mouth_0", "mode": "scale", "value": 0.0}),
    )
    .await;
    let (status, bytes) = send(&app, Request::post("/export").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    let exported = Session::from_bytes(&bytes).unwrap();
    for l in 5..=8 {
        // Re-quantized, so only within half a mouth step.
        assert!(exported.frame(l).unwrap().mouth[0].abs() <= 0.01);
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("edited.ifvc");
    let (status, info) = post_json(&app, "/export", json!({"path": path})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(info["bytes"], bytes.len());
    assert_eq!(std::fs::read(&path).unwrap(), bytes);

    let bad = dir.path().join("missing").join("x.ifvc");
    let (status, err) = post_json(&app, "/export", json!({"path": bad})).await;
    assert_eq!(status, StatusCode::INTERNAL_SERVER_ERROR);
    assert_eq!(err["error"], "io");
    assert_eq!(get_json(&app, "/edits").await.as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn sessions_are_isolated() {
    let a = app();
    let b = app();
    post_json(
        &a,
        "/edits",
        json!({"frames": "all", "target": "rot_1", "mode": "set", "value": 0.25}),
    )
    .await;
    assert_eq!(yaw(&get_json(&a, "/frames/0/semantics").await), 0.25);
    assert_ne!(yaw(&get_json(&b, "/frames/0/semantics").await), 0.25);
}
