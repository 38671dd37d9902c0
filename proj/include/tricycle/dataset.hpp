#pragma once

#include <filesystem>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "tricycle/image_io.hpp"
#include "tricycle/shape_prior.hpp"

namespace tricycle {

enum class Split { Train, Val, Eval };

inline const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Eval: return "eval";
    }
    return "?";
}

struct DatasetEntry {
    std::filesystem::path image_path;
    std::optional<std::filesystem::path> mask_path;
};

struct DatasetManifest {
    std::filesystem::path root;
    Split split = Split::Train;
    std::vector<DatasetEntry> entries;
    int domain_channels = 1;
    int size = 0;  // image side, when known
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Layout: root/images/<split>/<name>.(png|jpg), masks (when present) at
// root/masks/<split>/<name>.png. Eval entries must all carry masks. Entries
// are ordered lexicographically by file name for platform-stable iteration.
inline DatasetManifest load_dataset(const std::filesystem::path& root, Split split) {
    namespace fs = std::filesystem;
    DatasetManifest m;
    m.root = root;
    m.split = split;
    const fs::path img_dir = root / "images" / split_name(split);
    const fs::path mask_dir = root / "masks" / split_name(split);
    if (!fs::is_directory(img_dir))
        throw ValidationError("load_dataset: missing directory " + img_dir.string());

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(img_dir)) {
        if (!e.is_regular_file()) continue;
        const auto ext = e.path().extension().string();
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg")
            files.push_back(e.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) {
                  return a.filename().string() < b.filename().string();
              });

    std::vector<std::string> missing;
    for (const auto& f : files) {
        DatasetEntry entry;
        entry.image_path = f;
        const fs::path mask = mask_dir / (f.stem().string() + ".png");
        if (fs::exists(mask))
            entry.mask_path = mask;
        else if (split == Split::Eval)
            missing.push_back(f.filename().string());
        m.entries.push_back(std::move(entry));
    }
    if (!missing.empty()) {
        std::string msg = "load_dataset: eval entries missing masks:";
        for (const auto& s : missing) msg += " " + s;
        throw ValidationError(msg);
    }
    return m;
}

struct ToyDatasetParams {
    int train_count = 200;
    int eval_count = 40;
    int size = 64;
    // Texture statistics: ROI is the brightest region, the cone interior is
    // midtone, everything outside the cone is dark.
    float background_level = 0.08f;
    float cone_level = 0.35f;
    float roi_level = 0.78f;
    float noise_sd = 0.06f;
};

namespace detail {

inline Image render_toy_image(const MaskImage& roi, const MaskImage& cone, Rng& rng) {
    Image img(roi.height, roi.width, 1);
    std::normal_distribution<float> noise(0.0f, 1.0f);
    ToyDatasetParams p;
    for (int y = 0; y < roi.height; ++y) {
        for (int x = 0; x < roi.width; ++x) {
            float level = p.background_level;
            if (roi.at(y, x) != 0.0f) level = p.roi_level;
            else if (cone.at(y, x) != 0.0f) level = p.cone_level;
            img.at(y, x) = level + p.noise_sd * noise(rng);
        }
    }
    // Light 3x3 box blur keeps the speckle but softens pixel edges.
    Image blurred(img.height, img.width, 1);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            float s = 0.0f;
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int yy = y + dy, xx = x + dx;
                    if (yy < 0 || yy >= img.height || xx < 0 || xx >= img.width) continue;
                    s += img.at(yy, xx);
                    ++n;
                }
            blurred.at(y, x) = s / static_cast<float>(n);
        }
    blurred.clamp01();
    return blurred;
}

}  // namespace detail

// Procedural desk-scale dataset: elliptical bright-speckle ROIs inside
// randomized ultrasound cones over a dark noise background, with exact
// ground-truth masks for every split.
inline DatasetManifest make_toy_dataset(Rng& rng, const ToyDatasetParams& params,
                                        const std::filesystem::path& out) {
    namespace fs = std::filesystem;
    if (params.train_count < 1 || params.eval_count < 0)
        throw std::invalid_argument("make_toy_dataset: counts must be positive");
    nlohmann::ordered_json manifest;
    manifest["schema"] = "tricycle-toy-manifest/1";
    manifest["size"] = params.size;
    auto samples = nlohmann::ordered_json::array();

    auto emit = [&](Split split, int index) {
        auto tmpl = sample_template(rng, params.size, /*with_cone=*/true);
        MaskImage cone_mask = tmpl.cone ? rasterize_cone(*tmpl.cone, params.size)
                                        : MaskImage(params.size, params.size, 1, 1.0f);
        Image img = detail::render_toy_image(tmpl.mask, cone_mask, rng);
        char name[32];
        std::snprintf(name, sizeof(name), "toy_%05d.png", index);
        const fs::path img_path = out / "images" / split_name(split) / name;
        const fs::path mask_path = out / "masks" / split_name(split) / name;
        save_image(img, img_path);
        save_image(tmpl.mask, mask_path);
        samples.push_back({{"split", split_name(split)},
                           {"name", name},
                           {"ellipse",
                            {{"center_dx", tmpl.ellipse.center_dx},
                             {"center_dy", tmpl.ellipse.center_dy},
                             {"angle", tmpl.ellipse.angle},
                             {"semi_major", tmpl.ellipse.semi_major},
                             {"semi_minor", tmpl.ellipse.semi_minor}}}});
    };

    for (int i = 0; i < params.train_count; ++i) emit(Split::Train, i);
    for (int i = 0; i < params.eval_count; ++i) emit(Split::Eval, i);

    manifest["samples"] = samples;
    fs::create_directories(out);
    std::ofstream mf(out / "manifest.json");
    mf << manifest.dump(2) << "\n";
    return load_dataset(out, Split::Train);
}

inline std::vector<DomainImage> load_images(const DatasetManifest& m, int channels = 1) {
    std::vector<DomainImage> out;
    out.reserve(m.entries.size());
    for (const auto& e : m.entries) out.push_back(load_image(e.image_path, channels));
    return out;
}

inline std::vector<std::pair<DomainImage, MaskImage>> load_labelled_pairs(
    const DatasetManifest& m, int channels = 1) {
    std::vector<std::pair<DomainImage, MaskImage>> out;
    for (const auto& e : m.entries) {
        if (!e.mask_path) continue;
        auto mask = load_image(*e.mask_path, 1);
        out.emplace_back(load_image(e.image_path, channels), binarize(mask));
    }
    return out;
}

}  // namespace tricycle
