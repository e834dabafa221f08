// The HTTP suggestion service, exercised in-process.
//
// `stylerank serve` runs the same router on a TCP listener.

use std::error::Error;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use tower::ServiceExt;

use stylerank::compat::synthetic::{generate_catalog, CatalogConfig};
use stylerank::compat::CompatibilityIndex;
use stylerank::service::{router, SceneStore, ServiceState};

async fn call(app: &axum::Router, req: Request<Body>) -> Result<(StatusCode, serde_json::Value), Box<dyn Error>> {
    let res = app.clone().oneshot(req).await?;
    let status = res.status();
    let bytes = res.into_body().collect().await?.to_bytes();
    Ok((status, serde_json::from_slice(&bytes)?))
}

fn post(uri: &str, body: serde_json::Value) -> Request<Body> {
    Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .expect("valid request")
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (registry, embeddings) = generate_catalog(&CatalogConfig {
        items: 80,
        seed: 1,
        ..Default::default()
    })?;
    let index = CompatibilityIndex::build(&registry, &embeddings)?;
    let seed = index.items()[0].id.clone();
    let app = router(Arc::new(ServiceState::new(index, SceneStore::in_memory())));

    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build()?;
    rt.block_on(async {
        let (_, page) = call(&app, Request::get("/v1/furniture?class=sofa").body(Body::empty())?).await?;
        println!(
            "sofas: {} in catalog, first {}",
            page["total"], page["items"][0]["furniture_id"]
        );

        let uri = format!("/v1/suggest/single?seed={seed}&class=lamp&k=3");
        let (_, single) = call(&app, Request::get(uri).body(Body::empty())?).await?;
        println!("lamps for {seed}: {}", single["suggestions"]);

        let body = serde_json::json!({ "scene": [seed], "class": "lamp", "k": 3 });
        let (_, multi) = call(&app, post("/v1/suggest/multi", body)).await?;
        assert_eq!(multi, single);

        let (_, energy) = call(&app, post("/v1/scene/energy", serde_json::json!({ "scene": [seed] }))).await?;
        println!("single-item scene energy {}", energy["energy"]);

        let scene = serde_json::json!({
            "name": "reading corner",
            "placements": [{ "furniture_id": seed, "x": 1.0, "y": 2.0, "rotation": 90.0 }]
        });
        let (status, saved) = call(&app, post("/v1/scenes", scene)).await?;
        println!("saved {} ({status})", saved["scene_id"]);

        let (status, err) = call(&app, Request::get("/v1/scenes/scene-999999").body(Body::empty())?).await?;
        println!("{status}: {}", err["error"]["message"]);
        Ok(())
    })
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
