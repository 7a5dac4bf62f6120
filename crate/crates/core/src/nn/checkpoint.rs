//! Network weights in the safetensors container, with the model spec and
//! fade-in weight stored in the header metadata.

use std::collections::HashMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use safetensors::tensor::{Dtype, SafeTensors, TensorView};

use super::network::Network;
use crate::error::{Error, Result};
use crate::models::spec::{AlphaHandle, ModelSpec};

const SPEC_KEY: &str = "model_spec";
const ALPHA_KEY: &str = "alpha";

pub fn save_checkpoint(net: &Network, path: &Path) -> Result<()> {
    let bytes: Vec<(String, Vec<u8>, Vec<usize>)> = net
        .params()
        .map(|p| {
            let b = p.value.iter().flat_map(|v| v.to_le_bytes()).collect();
            (p.name.clone(), b, p.dims.clone())
        })
        .collect();
    let views = bytes
        .iter()
        .map(|(n, b, d)| {
            TensorView::new(Dtype::F32, d.clone(), b)
                .map(|v| (n.clone(), v))
                .map_err(|e| Error::Checkpoint(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut meta = HashMap::new();
    meta.insert(SPEC_KEY.to_string(), serde_json::to_string(&net.spec).expect("spec serializes"));
    if let Some(a) = net.alpha() {
        meta.insert(ALPHA_KEY.to_string(), a.get().to_string());
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    safetensors::serialize_to_file(views, Some(meta), path).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))
}

/// Rebuilds the network recorded in the checkpoint and loads its weights.
pub fn load_checkpoint(path: &Path) -> Result<Network> {
    let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |m: String| Error::Checkpoint(format!("{}: {m}", path.display()));
    let (_, header) = SafeTensors::read_metadata(&data).map_err(|e| bad(e.to_string()))?;
    let meta = header.metadata().clone().unwrap_or_default();
    let spec_json = meta.get(SPEC_KEY).ok_or_else(|| bad("missing model spec".into()))?;
    let mut spec: ModelSpec = serde_json::from_str(spec_json).map_err(|e| bad(e.to_string()))?;
    if spec.has_fade() {
        let a = meta.get(ALPHA_KEY).and_then(|s| s.parse().ok()).unwrap_or(0.0);
        spec.alpha = Some(AlphaHandle::new(a));
    }
    let mut net = Network::new(spec, &mut ChaCha8Rng::seed_from_u64(0))?;
    load_weights(&mut net, &data).map_err(|e| bad(e.to_string()))?;
    Ok(net)
}

/// Loads weights into an existing network; every parameter must be present.
pub fn load_weights_from(net: &mut Network, path: &Path) -> Result<()> {
    let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    load_weights(net, &data).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))
}

fn load_weights(net: &mut Network, data: &[u8]) -> Result<()> {
    let st = SafeTensors::deserialize(data).map_err(|e| Error::Checkpoint(e.to_string()))?;
    for p in net.params_mut() {
        let t = st
            .tensor(&p.name)
            .map_err(|_| Error::Checkpoint(format!("missing tensor {}", p.name)))?;
        if t.dtype() != Dtype::F32 || t.shape() != p.dims.as_slice() {
            return Err(Error::Checkpoint(format!("tensor {} has shape {:?}, expected {:?}", p.name, t.shape(), p.dims)));
        }
        for (v, b) in p.value.iter_mut().zip(t.data().chunks_exact(4)) {
            *v = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
        }
    }
    Ok(())
}
