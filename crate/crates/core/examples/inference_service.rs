// Start the HTTP service on an ephemeral port, upload an image to /predict,
// check /health, and shut down.
//
//     cargo run --example inference_service

use std::error::Error;
use std::io::Cursor;

use microbe_screen::augment::Raster;
use microbe_screen::classify::ModelManifest;
use microbe_screen::service::{self, HealthResponse, PredictResponse, ServiceConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let manifest = dir.path().join("model.json");
    ModelManifest::reference("reference-v1").save(&manifest)?;

    let mut png = Cursor::new(Vec::new());
    Raster::new(64, 64, 3, vec![20; 64 * 64 * 3])?.to_dynamic().write_to(&mut png, image::ImageFormat::Png)?;
    let png = png.into_inner();

    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let config = ServiceConfig { bind_address: "127.0.0.1:0".parse()?, ..ServiceConfig::new(&manifest) };
        let running = service::spawn(config).await?;
        while running.state.current().is_none() {
            tokio::time::sleep(std::time::Duration::from_millis(5)).await;
        }
        let client = reqwest::Client::new();
        let health: HealthResponse = client.get(running.url("/health")).send().await?.json().await?;
        println!("health {} model {}", health.status, health.model_id);

        let form = reqwest::multipart::Form::new()
            .part("file", reqwest::multipart::Part::bytes(png).file_name("dark.png").mime_str("image/png")?);
        let resp: PredictResponse = client.post(running.url("/predict")).multipart(form).send().await?.json().await?;
        println!("{}", serde_json::to_string(&resp)?);
        running.shutdown().await?;
        Ok::<_, Box<dyn Error>>(())
    })
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
