#pragma once

#include <cstddef>
#include <memory>

#include "sentinel/backend.hpp"
#include "sentinel/config.hpp"

namespace sentinel {

/// OpenCV DNN backend: YOLOv8-style plate detector, CTC plate recognizer,
/// YuNet face detector and SFace embedder, all from ONNX files. Calls are
/// serialized internally. Throws Error(BackendUnavailable) when a model
/// cannot be loaded.
std::shared_ptr<const DetectorBackend> make_neural_backend(const NeuralBackendConfig& config,
                                                           std::size_t embedding_dim);

}  // namespace sentinel
