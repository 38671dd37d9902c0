#pragma once

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "tricycle/config.hpp"
#include "tricycle/dataset.hpp"
#include "tricycle/tricycle.hpp"

namespace tricycle {

namespace cli_detail {

struct CommonOpts {
    std::string config_file;
    std::string profile = "paper";
    TrainingConfig cfg;
};

// Precedence: profile defaults, then the config file, then explicit flags.
inline void add_training_options(CLI::App* app, CommonOpts& o) {
    app->add_option("--config", o.config_file, "flat key = value config file");
    app->add_option("--profile", o.profile, "config profile: toy or paper")
        ->check(CLI::IsMember({"toy", "paper"}));
    app->add_option("--seed", o.cfg.seed, "random seed");
    app->add_option("--image-size", o.cfg.image_size, "training image side");
    app->add_option("--batch-size", o.cfg.batch_size, "batch size");
    app->add_option("--max-epochs", o.cfg.max_epochs, "epoch cap");
    app->add_option("--base-width", o.cfg.base_width, "first-level feature width");
    app->add_option("--depth", o.cfg.depth, "network depth");
    app->add_option("--learning-rate", o.cfg.learning_rate, "optimizer learning rate");
    app->add_flag("--deterministic", o.cfg.deterministic,
                  "single-worker deterministic mode");
}

inline TrainingConfig resolve_config(CLI::App* app, CommonOpts& o) {
    TrainingConfig cfg = o.profile == "toy" ? toy_config() : paper_config();
    if (!o.config_file.empty()) config::load_file(cfg, o.config_file);
    auto take_if = [&](const char* flag, auto member) {
        if (app->count(flag) > 0) cfg.*member = o.cfg.*member;
    };
    take_if("--seed", &TrainingConfig::seed);
    take_if("--image-size", &TrainingConfig::image_size);
    take_if("--batch-size", &TrainingConfig::batch_size);
    take_if("--max-epochs", &TrainingConfig::max_epochs);
    take_if("--base-width", &TrainingConfig::base_width);
    take_if("--depth", &TrainingConfig::depth);
    take_if("--learning-rate", &TrainingConfig::learning_rate);
    if (app->count("--deterministic") > 0) cfg.deterministic = true;
    if (cfg.deterministic) torch::set_num_threads(1);
    return cfg;
}

inline std::string default_data_root() {
    const char* env = std::getenv("TRICYCLE_DATA_ROOT");
    return env ? env : "";
}

inline std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    if (!fs::is_directory(dir))
        throw std::runtime_error("not a directory: " + dir.string());
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto ext = e.path().extension().string();
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

inline std::vector<DomainImage> sized_images(const DatasetManifest& m,
                                             const TrainingConfig& cfg) {
    auto images = load_images(m, cfg.domain_channels);
    for (auto& img : images)
        if (img.height != cfg.image_size || img.width != cfg.image_size)
            img = resize_image(img, cfg.image_size);
    return images;
}

inline std::vector<std::pair<DomainImage, MaskImage>> sized_pairs(
    const DatasetManifest& m, const TrainingConfig& cfg) {
    auto pairs = load_labelled_pairs(m, cfg.domain_channels);
    for (auto& [img, mask] : pairs) {
        if (img.height != cfg.image_size || img.width != cfg.image_size)
            img = resize_image(img, cfg.image_size);
        if (mask.height != cfg.image_size || mask.width != cfg.image_size)
            mask = resize_mask(mask, cfg.image_size);
    }
    return pairs;
}

inline ModelBundle bundle_for(const TrainingConfig& cfg, const std::string& init) {
    if (!init.empty()) return load_checkpoint(init).bundle;
    return build_model_bundle(cfg.image_size, cfg.domain_channels, cfg.base_width,
                              cfg.depth);
}

}  // namespace cli_detail

// Top-level command dispatcher; returns a process exit code.
inline int run_cli(int argc, const char* const* argv) {
    using namespace cli_detail;
    CLI::App app{"tricycle: shape-prior driven unsupervised segmentation"};
    app.require_subcommand(1);

    // generate-shapes
    auto* gen = app.add_subcommand("generate-shapes",
                                   "sample synthetic segmentation templates");
    int gen_count = 16, gen_size = 256;
    std::string gen_cone = "on", gen_out;
    uint64_t gen_seed = 0;
    gen->add_option("--count", gen_count)->required();
    gen->add_option("--size", gen_size);
    gen->add_option("--cone", gen_cone)->check(CLI::IsMember({"on", "off"}));
    gen->add_option("--seed", gen_seed);
    gen->add_option("--out", gen_out)->required();

    // extract-edges
    auto* ext = app.add_subcommand("extract-edges", "edge maps for a directory of images");
    std::string ext_in, ext_out, ext_backend = "sobel";
    ext->add_option("--in", ext_in)->required();
    ext->add_option("--out", ext_out)->required();
    ext->add_option("--backend", ext_backend);

    // make-toy
    auto* toy = app.add_subcommand("make-toy", "procedural desk-scale dataset");
    int toy_count = 200, toy_eval = 40, toy_size = 64;
    uint64_t toy_seed = 0;
    std::string toy_out;
    toy->add_option("--count", toy_count);
    toy->add_option("--eval-count", toy_eval);
    toy->add_option("--size", toy_size);
    toy->add_option("--seed", toy_seed);
    toy->add_option("--out", toy_out)->required();

    // pretrain-pf
    auto* pre = app.add_subcommand("pretrain-pf", "pretrain the patch-filling generator");
    CommonOpts pre_o;
    std::string pre_data = default_data_root(), pre_out;
    pre->add_option("--data", pre_data);
    pre->add_option("--out", pre_out)->required();
    add_training_options(pre, pre_o);

    // train
    auto* tr = app.add_subcommand("train", "unsupervised training");
    CommonOpts tr_o;
    std::string tr_data = default_data_root(), tr_out, tr_init;
    tr->add_option("--data", tr_data);
    tr->add_option("--out", tr_out)->required();
    tr->add_option("--init", tr_init, "checkpoint to start from (e.g. pretrained g_pf)");
    add_training_options(tr, tr_o);

    // finetune
    auto* ft = app.add_subcommand("finetune", "semi-supervised fine-tuning");
    CommonOpts ft_o;
    std::string ft_data = default_data_root(), ft_out, ft_init;
    double ft_fraction = 0.1;
    ft->add_option("--data", ft_data);
    ft->add_option("--init", ft_init)->required();
    ft->add_option("--out", ft_out)->required();
    ft->add_option("--label-fraction", ft_fraction)->required();
    add_training_options(ft, ft_o);

    // train-baseline
    auto* bl = app.add_subcommand("train-baseline", "supervised segmentation baseline");
    CommonOpts bl_o;
    std::string bl_data = default_data_root(), bl_out;
    bl->add_option("--data", bl_data);
    bl->add_option("--out", bl_out)->required();
    add_training_options(bl, bl_o);

    // predict
    auto* pr = app.add_subcommand("predict", "segment a directory of images");
    std::string pr_in, pr_out, pr_ckpt;
    double pr_threshold = 0.5;
    pr->add_option("--in", pr_in)->required();
    pr->add_option("--out", pr_out)->required();
    pr->add_option("--checkpoint", pr_ckpt)->required();
    pr->add_option("--threshold", pr_threshold);

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "score predicted masks against ground truth");
    std::string ev_pred, ev_gt, ev_out, ev_csv;
    double ev_thr = 0.65;
    ev->add_option("--pred", ev_pred)->required();
    ev->add_option("--gt", ev_gt)->required();
    ev->add_option("--out", ev_out)->required();
    ev->add_option("--csv", ev_csv);
    ev->add_option("--th-iou-threshold", ev_thr);

    try {
        app.parse(argc, argv);

        if (*gen) {
            Rng rng(gen_seed);
            const bool with_cone = gen_cone == "on";
            nlohmann::ordered_json manifest;
            manifest["schema"] = "tricycle-shapes-manifest/1";
            manifest["size"] = gen_size;
            manifest["cone"] = with_cone;
            manifest["seed"] = gen_seed;
            auto samples = nlohmann::ordered_json::array();
            for (int i = 0; i < gen_count; ++i) {
                auto tmpl = sample_template(rng, gen_size, with_cone);
                char name[32];
                std::snprintf(name, sizeof(name), "mask_%05d.png", i);
                save_image(tmpl.mask, std::filesystem::path(gen_out) / name);
                nlohmann::ordered_json s;
                s["name"] = name;
                s["ellipse"] = {{"center_dx", tmpl.ellipse.center_dx},
                                {"center_dy", tmpl.ellipse.center_dy},
                                {"angle", tmpl.ellipse.angle},
                                {"semi_major", tmpl.ellipse.semi_major},
                                {"semi_minor", tmpl.ellipse.semi_minor}};
                if (tmpl.cone)
                    s["cone"] = {{"apex_x", tmpl.cone->apex_x},
                                 {"apex_y", tmpl.cone->apex_y},
                                 {"center_x", tmpl.cone->center_x},
                                 {"center_y", tmpl.cone->center_y},
                                 {"semi_x", tmpl.cone->semi_x},
                                 {"semi_y", tmpl.cone->semi_y}};
                samples.push_back(s);
            }
            manifest["samples"] = samples;
            std::filesystem::create_directories(gen_out);
            std::ofstream mf(std::filesystem::path(gen_out) / "manifest.json");
            mf << manifest.dump(2) << "\n";
            std::cout << "wrote " << gen_count << " templates to " << gen_out << "\n";
        } else if (*ext) {
            const auto files = list_images(ext_in);
            for (const auto& f : files) {
                auto rel = std::filesystem::relative(f, ext_in);
                auto edge = extract_edges(load_image(f, 1), ext_backend);
                auto out_path = (std::filesystem::path(ext_out) / rel)
                                    .replace_extension(".png");
                save_image(edge, out_path);
            }
            std::cout << "extracted " << files.size() << " edge maps to " << ext_out << "\n";
        } else if (*toy) {
            Rng rng(toy_seed);
            ToyDatasetParams p;
            p.train_count = toy_count;
            p.eval_count = toy_eval;
            p.size = toy_size;
            make_toy_dataset(rng, p, toy_out);
            std::cout << "toy dataset at " << toy_out << "\n";
        } else if (*pre) {
            auto cfg = resolve_config(pre, pre_o);
            auto manifest = load_dataset(pre_data, Split::Train);
            auto images = sized_images(manifest, cfg);
            std::vector<EdgeImage> edges;
            edges.reserve(images.size());
            for (const auto& img : images)
                edges.push_back(extract_edges(img, cfg.edge_backend));
            auto bundle = build_model_bundle(cfg.image_size, cfg.domain_channels,
                                             cfg.base_width, cfg.depth);
            pretrain_patch_filler(bundle, edges, cfg);
            save_checkpoint(std::filesystem::path(pre_out) / "pretrained.pt", bundle,
                            nullptr, config::hash(cfg));
            std::cout << "pretrained g_pf -> " << pre_out << "/pretrained.pt\n";
        } else if (*tr) {
            auto cfg = resolve_config(tr, tr_o);
            auto manifest = load_dataset(tr_data, Split::Train);
            auto images = sized_images(manifest, cfg);
            ModelBundle bundle = bundle_for(cfg, tr_init);
            if (tr_init.empty()) {
                std::vector<EdgeImage> edges;
                edges.reserve(images.size());
                for (const auto& img : images)
                    edges.push_back(extract_edges(img, cfg.edge_backend));
                pretrain_patch_filler(bundle, edges, cfg);
            }
            auto result = fit(bundle, images, cfg, tr_out);
            std::cout << "training done: best epoch " << result.best_epoch
                      << ", best m2s loss " << result.best_m2s_loss << "\n";
        } else if (*ft) {
            auto cfg = resolve_config(ft, ft_o);
            auto manifest = load_dataset(ft_data, Split::Train);
            auto pairs = sized_pairs(manifest, cfg);
            auto loaded = load_checkpoint(ft_init);
            fine_tune(loaded.bundle, pairs, ft_fraction, cfg);
            save_checkpoint(std::filesystem::path(ft_out) / "finetuned.pt",
                            loaded.bundle, nullptr, config::hash(cfg));
            std::cout << "finetuned -> " << ft_out << "/finetuned.pt\n";
        } else if (*bl) {
            auto cfg = resolve_config(bl, bl_o);
            auto manifest = load_dataset(bl_data, Split::Train);
            auto pairs = sized_pairs(manifest, cfg);
            auto bundle = train_supervised_baseline(pairs, cfg);
            save_checkpoint(std::filesystem::path(bl_out) / "baseline.pt", bundle,
                            nullptr, config::hash(cfg));
            std::cout << "baseline -> " << bl_out << "/baseline.pt\n";
        } else if (*pr) {
            auto loaded = load_checkpoint(pr_ckpt);
            auto& bundle = loaded.bundle;
            const int side = bundle.g_m2s.spec.image_size;
            for (const auto& f : list_images(pr_in)) {
                auto img = load_image(f, bundle.domain_channels);
                if (img.height != side || img.width != side)
                    img = resize_image(img, side);
                auto mask = predict_mask(bundle, img, pr_threshold);
                auto rel = std::filesystem::relative(f, pr_in);
                save_image(mask, (std::filesystem::path(pr_out) / rel)
                                     .replace_extension(".png"));
            }
            std::cout << "predictions in " << pr_out << "\n";
        } else if (*ev) {
            std::vector<ImageMetrics> per_image;
            for (const auto& f : list_images(ev_pred)) {
                auto rel = std::filesystem::relative(f, ev_pred);
                auto gt_path = std::filesystem::path(ev_gt) / rel;
                if (!std::filesystem::exists(gt_path))
                    throw std::runtime_error("evaluate: no ground truth for " +
                                             rel.string());
                auto pred = binarize(load_image(f, 1));
                auto gt = binarize(load_image(gt_path, 1));
                per_image.push_back(compute_metrics(confusion(pred, gt)));
            }
            auto report = aggregate_metrics(per_image, ev_thr);
            write_report(report, ev_out, ev_csv);
            std::cout << "evaluated " << per_image.size() << " masks: mean IoU "
                      << report.iou.mean << ", th-IoU " << report.th_iou << "\n";
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace tricycle
