#include "sentinel/neural_backend.hpp"

#include <mutex>

#include <opencv2/dnn.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <opencv2/objdetect.hpp>

#include "sentinel/error.hpp"
#include "sentinel/neural_decode.hpp"

namespace sentinel {

namespace {

class NeuralBackend final : public DetectorBackend {
public:
    NeuralBackend(const NeuralBackendConfig& config, std::size_t embedding_dim)
        : config_(config), embedding_dim_(embedding_dim) {
        try {
            plate_net_ = cv::dnn::readNetFromONNX(config.plate_model.string());
            ocr_net_ = cv::dnn::readNetFromONNX(config.ocr_model.string());
            face_detector_ = cv::FaceDetectorYN::create(config.face_detector_model.string(), "",
                                                        cv::Size(320, 320),
                                                        static_cast<float>(config.face_score_threshold));
            face_embedder_ = cv::FaceRecognizerSF::create(config.face_embedding_model.string(), "");
        } catch (const cv::Exception& e) {
            throw Error(Errc::BackendUnavailable, std::string("cannot load models: ") + e.what());
        }
        if (plate_net_.empty() || ocr_net_.empty() || !face_detector_ || !face_embedder_) {
            throw Error(Errc::BackendUnavailable, "cannot load models");
        }
    }

    std::string_view name() const noexcept override { return "onnx"; }

    std::vector<PlateReading> detect_plates(const FrameRef& frame) const override {
        std::lock_guard lock(mutex_);
        const cv::Mat image = load(frame);
        const int side = config_.plate_input_size;
        const Letterbox lb = Letterbox::fit(image.cols, image.rows, side);

        cv::Mat resized;
        cv::resize(image, resized, cv::Size(), lb.scale, lb.scale, cv::INTER_LINEAR);
        cv::Mat padded(side, side, image.type(), cv::Scalar(114, 114, 114));
        resized.copyTo(padded(cv::Rect(static_cast<int>(lb.pad_x), static_cast<int>(lb.pad_y),
                                       resized.cols, resized.rows)));
        plate_net_.setInput(cv::dnn::blobFromImage(padded, 1.0 / 255.0, cv::Size(side, side),
                                                   cv::Scalar(), true, false));
        cv::Mat out = plate_net_.forward();
        if (out.dims != 3 || out.size[0] != 1 || out.size[1] < 5) {
            throw Error(Errc::BackendUnavailable, "plate model output is not [1, 4 + classes, anchors]");
        }
        const auto rows = static_cast<std::size_t>(out.size[1]);
        const auto anchors = static_cast<std::size_t>(out.size[2]);
        const std::span<const float> data(out.ptr<float>(), rows * anchors);
        auto dets = non_max_suppression(
            decode_yolov8(data, rows - 4, anchors, config_.plate_score_threshold, lb, image.cols,
                          image.rows),
            config_.nms_iou);

        std::vector<PlateReading> readings;
        for (auto& d : dets) {
            d.class_id = kPlateClass;
            const cv::Rect roi(cv::Point(static_cast<int>(d.bbox.x_min), static_cast<int>(d.bbox.y_min)),
                               cv::Point(static_cast<int>(d.bbox.x_max), static_cast<int>(d.bbox.y_max)));
            const cv::Rect clipped = roi & cv::Rect(0, 0, image.cols, image.rows);
            if (clipped.area() == 0) continue;
            const CtcDecoded text = recognize(image(clipped));
            readings.push_back({d, text.text, text.confidence});
        }
        return readings;
    }

    std::vector<FaceObservation> detect_faces(const FrameRef& frame) const override {
        std::lock_guard lock(mutex_);
        const cv::Mat image = load(frame);
        face_detector_->setInputSize(image.size());
        cv::Mat faces;
        face_detector_->detect(image, faces);
        std::vector<FaceObservation> out;
        for (int i = 0; i < faces.rows; ++i) {
            const float* f = faces.ptr<float>(i);
            BBox box{std::max(0.0f, f[0]), std::max(0.0f, f[1]),
                     std::min<float>(static_cast<float>(image.cols), f[0] + f[2]),
                     std::min<float>(static_cast<float>(image.rows), f[1] + f[3])};
            if (!box.valid()) continue;
            cv::Mat aligned;
            cv::Mat feature;
            face_embedder_->alignCrop(image, faces.row(i), aligned);
            face_embedder_->feature(aligned, feature);
            feature = feature.reshape(1, 1);
            std::vector<double> values(feature.begin<float>(), feature.end<float>());
            if (values.size() != embedding_dim_) {
                throw Error(Errc::DimensionMismatch, "face embedder produced " +
                                                         std::to_string(values.size()) +
                                                         " values, expected " +
                                                         std::to_string(embedding_dim_));
            }
            const double score = std::clamp(static_cast<double>(f[14]), 0.0, 1.0);
            out.push_back({{box, kFaceClass, score}, Embedding(std::move(values))});
        }
        return out;
    }

private:
    static cv::Mat load(const FrameRef& frame) {
        cv::Mat image = cv::imread(frame.image_path, cv::IMREAD_COLOR);
        if (image.empty()) {
            throw Error(Errc::FrameNotFound, "cannot read image " + frame.image_path);
        }
        return image;
    }

    CtcDecoded recognize(const cv::Mat& crop) const {
        cv::Mat gray;
        cv::cvtColor(crop, gray, cv::COLOR_BGR2GRAY);
        ocr_net_.setInput(cv::dnn::blobFromImage(
            gray, 1.0 / 127.5, cv::Size(config_.ocr_input_width, config_.ocr_input_height),
            cv::Scalar(127.5)));
        cv::Mat out = ocr_net_.forward();
        // Accept [T, 1, C], [1, T, C] or [T, C].
        std::size_t steps = 0;
        std::size_t classes = 0;
        if (out.dims == 3 && out.size[1] == 1) {
            steps = static_cast<std::size_t>(out.size[0]);
            classes = static_cast<std::size_t>(out.size[2]);
        } else if (out.dims == 3 && out.size[0] == 1) {
            steps = static_cast<std::size_t>(out.size[1]);
            classes = static_cast<std::size_t>(out.size[2]);
        } else if (out.dims == 2) {
            steps = static_cast<std::size_t>(out.size[0]);
            classes = static_cast<std::size_t>(out.size[1]);
        } else {
            throw Error(Errc::BackendUnavailable, "recognizer output has an unsupported shape");
        }
        return ctc_greedy_decode(std::span<const float>(out.ptr<float>(), steps * classes), steps,
                                 classes, config_.ocr_alphabet, true);
    }

    NeuralBackendConfig config_;
    std::size_t embedding_dim_;
    mutable std::mutex mutex_;
    mutable cv::dnn::Net plate_net_;
    mutable cv::dnn::Net ocr_net_;
    cv::Ptr<cv::FaceDetectorYN> face_detector_;
    cv::Ptr<cv::FaceRecognizerSF> face_embedder_;
};

}  // namespace

std::shared_ptr<const DetectorBackend> make_neural_backend(const NeuralBackendConfig& config,
                                                           std::size_t embedding_dim) {
    return std::make_shared<NeuralBackend>(config, embedding_dim);
}

}  // namespace sentinel
