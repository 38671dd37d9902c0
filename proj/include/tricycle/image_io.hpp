#pragma once

#include <filesystem>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "tricycle/image.hpp"

namespace tricycle {

// PNG or JPEG from disk into [0,1] floats. channels must be 1 or 3; color
// inputs are returned RGB-planar.
inline Image load_image(const std::filesystem::path& path, int channels = 1) {
    cv::Mat m = cv::imread(path.string(),
                           channels == 1 ? cv::IMREAD_GRAYSCALE : cv::IMREAD_COLOR);
    if (m.empty())
        throw std::runtime_error("load_image: cannot read " + path.string());
    Image img(m.rows, m.cols, channels);
    if (channels == 1) {
        for (int y = 0; y < m.rows; ++y)
            for (int x = 0; x < m.cols; ++x)
                img.at(y, x) = m.at<uchar>(y, x) / 255.0f;
    } else {
        for (int y = 0; y < m.rows; ++y)
            for (int x = 0; x < m.cols; ++x) {
                const auto& bgr = m.at<cv::Vec3b>(y, x);
                img.at(y, x, 0) = bgr[2] / 255.0f;
                img.at(y, x, 1) = bgr[1] / 255.0f;
                img.at(y, x, 2) = bgr[0] / 255.0f;
            }
    }
    return img;
}

// 8-bit PNG; [0,1] maps to 0..255. Binary masks come out as 0/255.
inline void save_image(const Image& img, const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    cv::Mat m;
    if (img.channels == 1) {
        m.create(img.height, img.width, CV_8UC1);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                m.at<uchar>(y, x) = static_cast<uchar>(
                    std::clamp(img.at(y, x), 0.0f, 1.0f) * 255.0f + 0.5f);
    } else if (img.channels == 3) {
        m.create(img.height, img.width, CV_8UC3);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                m.at<cv::Vec3b>(y, x) = cv::Vec3b(
                    static_cast<uchar>(std::clamp(img.at(y, x, 2), 0.0f, 1.0f) * 255.0f + 0.5f),
                    static_cast<uchar>(std::clamp(img.at(y, x, 1), 0.0f, 1.0f) * 255.0f + 0.5f),
                    static_cast<uchar>(std::clamp(img.at(y, x, 0), 0.0f, 1.0f) * 255.0f + 0.5f));
    } else {
        throw std::invalid_argument("save_image: only 1 or 3 channels");
    }
    if (!cv::imwrite(path.string(), m))
        throw std::runtime_error("save_image: cannot write " + path.string());
}

// Bilinear resize per channel.
inline Image resize_image(const Image& img, int target) {
    if (img.height == target && img.width == target) return img;
    Image out(target, target, img.channels);
    for (int c = 0; c < img.channels; ++c) {
        cv::Mat src(img.height, img.width, CV_32FC1,
                    const_cast<float*>(img.data.data() + c * img.plane_size()));
        cv::Mat dst(target, target, CV_32FC1, out.data.data() + c * out.plane_size());
        cv::resize(src, dst, cv::Size(target, target), 0, 0, cv::INTER_LINEAR);
    }
    return out;
}

// Nearest-neighbor resize then re-binarize, so masks stay strictly {0,1}.
inline MaskImage resize_mask(const MaskImage& mask, int target) {
    if (mask.height == target && mask.width == target) return mask;
    MaskImage out(target, target, 1);
    cv::Mat src(mask.height, mask.width, CV_32FC1, const_cast<float*>(mask.data.data()));
    cv::Mat dst(target, target, CV_32FC1, out.data.data());
    cv::resize(src, dst, cv::Size(target, target), 0, 0, cv::INTER_NEAREST);
    for (float& v : out.data) v = v > 0.5f ? 1.0f : 0.0f;
    return out;
}

// 3x3 median filter per channel (replicate border).
inline Image median3x3(const Image& img) {
    Image out(img.height, img.width, img.channels);
    for (int c = 0; c < img.channels; ++c) {
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                std::array<float, 9> v;
                int k = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int yy = std::clamp(y + dy, 0, img.height - 1);
                        const int xx = std::clamp(x + dx, 0, img.width - 1);
                        v[k++] = img.at(yy, xx, c);
                    }
                std::nth_element(v.begin(), v.begin() + 4, v.end());
                out.at(y, x, c) = v[4];
            }
        }
    }
    return out;
}

}  // namespace tricycle
