#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "pclwater/gradcheck.hpp"
#include "pclwater/io.hpp"
#include "pclwater/manifest.hpp"
#include "pclwater/metrics.hpp"
#include "pclwater/parallel.hpp"
#include "pclwater/synth.hpp"
#include "pclwater/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pclwater;

namespace {

// diagnostic failure (not a usage problem): maps to exit 1
struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string resolve(const std::string& base, const std::string& path) {
    if (path.empty() || fs::path(path).is_absolute()) return path;
    return (fs::path(base) / path).string();
}

// Shipped tool geometry: side 6400 with tile 256 mirrors the full-scale
// 12800/512 layout at half scale, down to one top-layer tile.
TrainConfig cli_defaults() {
    TrainConfig cfg;
    cfg.spec.tile = 256;
    return cfg;
}

void add_pyramid_flags(CLI::App* cmd, PyramidSpec& spec) {
    cmd->add_option("--tile", spec.tile, "tile side in pixels");
    cmd->add_option("--rates", spec.rates, "pyramid downsampling rates")->delimiter(',');
}

void add_loss_flags(CLI::App* cmd, LossParams& lp) {
    cmd->add_option("--alpha-inter", lp.alpha_inter, "cross-layer term weight");
    cmd->add_option("--alpha-intra", lp.alpha_intra, "overlap term weight");
    cmd->add_option("--r", lp.r, "focal exponent");
    cmd->add_option("--lambda", lp.lambda, "background-term weight");
}

// Config file fills everything the command line left untouched.
void apply_config(const CLI::App* cmd, const std::string& path, TrainConfig& cfg,
                  bool& no_inter, bool& no_intra) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("config " + path + " is not valid JSON: " + e.what());
    }

    auto untouched = [&](const char* flag) {
        const CLI::Option* opt = cmd->get_option_no_throw(flag);
        return !opt || opt->count() == 0;
    };
    try {
        auto num = [&](const char* key, const char* flag, auto& target) {
            if (j.contains(key) && untouched(flag)) {
                target = j.at(key).get<std::decay_t<decltype(target)>>();
            }
        };
        num("learning_rate", "--lr", cfg.learning_rate);
        num("epochs", "--epochs", cfg.epochs);
        num("batch", "--batch", cfg.batch);
        num("momentum", "--momentum", cfg.momentum);
        num("weight_decay", "--weight-decay", cfg.weight_decay);
        num("poly_power", "--poly-power", cfg.poly_power);
        num("samples_per_image", "--samples", cfg.samples_per_image);
        num("threads", "--threads", cfg.threads);
        num("overlap_stride", "--stride", cfg.overlap_stride);
        num("heldout_eval_tiles", "--eval-tiles", cfg.heldout_eval_tiles);
        num("alpha_inter", "--alpha-inter", cfg.loss_params.alpha_inter);
        num("alpha_intra", "--alpha-intra", cfg.loss_params.alpha_intra);
        num("r", "--r", cfg.loss_params.r);
        num("lambda", "--lambda", cfg.loss_params.lambda);
        num("tile", "--tile", cfg.spec.tile);
        num("seed", "--seed", cfg.seed);
        if (j.contains("rates") && untouched("--rates")) {
            cfg.spec.rates = j.at("rates").get<std::vector<int>>();
        }
        if (j.contains("poly_schedule") && untouched("--poly")) {
            cfg.poly_schedule = j.at("poly_schedule").get<bool>();
        }
        if (j.contains("use_inter") && untouched("--no-inter")) {
            no_inter = !j.at("use_inter").get<bool>();
        }
        if (j.contains("use_intra") && untouched("--no-intra")) {
            no_intra = !j.at("use_intra").get<bool>();
        }
    } catch (const json::exception& e) {
        throw FormatError("config " + path + ": " + e.what());
    }
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

json footprint_json(const FracRect& fr) {
    return {{"top", fr.top}, {"left", fr.left}, {"height", fr.height}, {"width", fr.width}};
}

json rect_json(const IntRect& r) {
    return {{"row", r.row0}, {"col", r.col0}, {"height", r.height}, {"width", r.width}};
}

json tile_json(const TileCoord& t) {
    return {{"row", t.row0}, {"col", t.col0}, {"size", t.size}};
}

std::vector<const ManifestEntry*> entries_for_split(const Manifest& m, const std::string& name) {
    const Split want = split_from_name(name);
    std::vector<const ManifestEntry*> out;
    for (const ManifestEntry& e : m.entries) {
        auto it = m.split.find(e.id);
        if (it != m.split.end() && it->second == want) out.push_back(&e);
    }
    return out;
}

CorpusItem load_item(const std::string& base, const ManifestEntry& e) {
    CorpusItem item;
    item.id = e.id;
    item.image = read_png_image(resolve(base, e.image_path));
    item.mask = read_png_mask(resolve(base, e.mask_path));
    return item;
}

// ---- synth ----

struct SynthOpts {
    std::string out;
    int count = 16;
    int side = 6400;
    TrainConfig cfg = cli_defaults();
    std::string config;
    bool no_inter = false, no_intra = false; // unused; keeps apply_config generic
    CLI::App* cmd = nullptr;
};

void run_synth(SynthOpts& o) {
    apply_config(o.cmd, o.config, o.cfg, o.no_inter, o.no_intra);
    PyramidSpec spec = o.cfg.spec;
    spec.validate(o.side, o.side);
    if (o.count < 1) throw ParamError("--count must be >= 1");

    fs::create_directories(fs::path(o.out) / "images");
    fs::create_directories(fs::path(o.out) / "masks");

    Manifest m;
    m.seed = o.cfg.seed;
    json items = json::array();
    std::vector<std::string> ids;

    const int chunk = std::max(1, o.cfg.threads);
    for (int start = 0; start < o.count; start += chunk) {
        const int n = std::min(chunk, o.count - start);
        std::vector<CorpusItem> slots{std::size_t(n)};
        parallel_for(n, o.cfg.threads, [&](int k) {
            slots[std::size_t(k)] = synth_image(o.cfg.seed, start + k, o.side);
        });
        for (int k = 0; k < n; ++k) {
            CorpusItem& item = slots[std::size_t(k)];
            const std::string image_rel = "images/" + item.id + ".png";
            const std::string mask_rel = "masks/" + item.id + ".png";
            write_png_image((fs::path(o.out) / image_rel).string(), item.image);
            write_png_mask((fs::path(o.out) / mask_rel).string(), item.mask);
            m.entries.push_back(ManifestEntry{item.id, image_rel, mask_rel, o.side, o.side});
            ids.push_back(item.id);
            items.push_back({{"id", item.id}, {"water_fraction", water_fraction(item.mask)}});
            std::cerr << "wrote " << item.id << "\n";
        }
    }

    m.split = make_split(ids, o.cfg.seed);
    const std::string manifest_path = (fs::path(o.out) / "manifest.json").string();
    save_manifest(m, manifest_path);

    emit({{"manifest", manifest_path},
          {"count", o.count},
          {"side", o.side},
          {"tile", spec.tile},
          {"rates", spec.rates},
          {"items", items}});
}

// ---- split ----

struct SplitOpts {
    int n = 0;
    std::string manifest;
    std::uint64_t seed = 7;
    bool write_back = false;
};

void run_split(SplitOpts& o) {
    std::vector<std::string> ids;
    Manifest m;
    if (o.n > 0 && !o.manifest.empty()) throw ParamError("pass either --n or --manifest, not both");
    if (o.n > 0) {
        char buf[16];
        for (int i = 0; i < o.n; ++i) {
            std::snprintf(buf, sizeof buf, "img_%03d", i);
            ids.emplace_back(buf);
        }
    } else if (!o.manifest.empty()) {
        m = load_manifest(o.manifest);
        for (const ManifestEntry& e : m.entries) ids.push_back(e.id);
    } else {
        throw ParamError("pass --n or --manifest");
    }

    const std::map<std::string, Split> split = make_split(ids, o.seed);
    json lists = {{"train", json::array()}, {"val", json::array()}, {"test", json::array()}};
    for (const std::string& id : ids) lists[split_name(split.at(id))].push_back(id);

    if (o.write_back) {
        if (o.manifest.empty()) throw ParamError("--write-back needs --manifest");
        m.split = split;
        m.seed = o.seed;
        save_manifest(m, o.manifest);
    }

    emit({{"seed", o.seed},
          {"counts",
           {{"train", lists["train"].size()},
            {"val", lists["val"].size()},
            {"test", lists["test"].size()}}},
          {"train", lists["train"]},
          {"val", lists["val"]},
          {"test", lists["test"]}});
}

// ---- pyramid ----

struct PyramidOpts {
    std::string image;
    std::string out;
    TrainConfig cfg = cli_defaults();
    std::string config;
    bool no_inter = false, no_intra = false;
    CLI::App* cmd = nullptr;
};

void run_pyramid(PyramidOpts& o) {
    apply_config(o.cmd, o.config, o.cfg, o.no_inter, o.no_intra);
    const PyramidSpec& spec = o.cfg.spec;
    ByteRaster bytes = read_png_image(o.image);
    spec.validate(bytes.width, bytes.height);
    fs::create_directories(o.out);

    json layers = json::array();
    for (std::size_t k = 0; k < spec.rates.size(); ++k) {
        const int rate = spec.rates[k];
        const std::string path =
            (fs::path(o.out) / ("layer_" + std::to_string(k + 1) + ".png")).string();
        if (rate == 1) {
            write_png_image(path, bytes);
        } else {
            write_png_image(path, bytes_from_grid(downsample_area_from_bytes(bytes, rate)));
        }
        layers.push_back({{"index", k + 1},
                          {"rate", rate},
                          {"width", bytes.width / rate},
                          {"height", bytes.height / rate},
                          {"path", path}});
    }
    emit({{"image", o.image}, {"layers", layers}});
}

// ---- groups ----

struct GroupsOpts {
    int side = 6400;
    int row = 0;
    int col = 0;
    int stride = 0;
    TrainConfig cfg = cli_defaults();
    std::string config;
    bool no_inter = false, no_intra = false;
    CLI::App* cmd = nullptr;
};

void run_groups(GroupsOpts& o) {
    apply_config(o.cmd, o.config, o.cfg, o.no_inter, o.no_intra);
    const PyramidSpec& spec = o.cfg.spec;
    spec.validate(o.side, o.side);
    const int stride = o.stride > 0 ? o.stride : spec.tile / 2;

    const TileCoord anchor{o.row, o.col, spec.tile};
    InterLayerGroup inter = inter_group_for(anchor, spec, o.side);
    json uppers = json::array();
    for (const LayerFootprint& fp : inter.uppers) {
        uppers.push_back({{"layer", fp.layer_index},
                          {"rate", fp.rate},
                          {"tile", tile_json(fp.tile)},
                          {"footprint", footprint_json(fp.footprint)}});
    }

    json intra;
    try {
        IntraLayerGroup group = intra_group_sample(o.side, spec.tile, o.row, o.col, stride);
        json tiles = json::array();
        for (const TileCoord& t : group.tiles) tiles.push_back(tile_json(t));
        json pairs = json::array();
        for (const PairOverlap& po : group.pairs) {
            pairs.push_back({{"i", po.i},
                             {"j", po.j},
                             {"in_i", rect_json(po.in_i)},
                             {"in_j", rect_json(po.in_j)}});
        }
        intra = {{"stride", stride}, {"tiles", tiles}, {"pairs", pairs}};
    } catch (const GeometryError& e) {
        std::cerr << "note: no overlapping window here: " << e.what() << "\n";
        intra = nullptr;
    }

    emit({{"side", o.side},
          {"inter", {{"anchor", tile_json(anchor)}, {"uppers", uppers}}},
          {"intra", intra}});
}

// ---- loss ----

struct LossOpts {
    std::string p1, p2, p3, mask;
    std::vector<std::string> q, qmask;
    int stride = 0;
    TrainConfig cfg = cli_defaults();
    std::string config;
    bool no_inter = false, no_intra = false;
    CLI::App* cmd = nullptr;
};

RasterGrid mask_grid_from_png(const std::string& path) {
    ByteRaster bytes = read_png_mask(path);
    if (bytes.width != bytes.height) {
        throw ShapeError("mask " + path + " must be square, got " + std::to_string(bytes.width) +
                         "x" + std::to_string(bytes.height));
    }
    return mask_tile_from_bytes(bytes, TileCoord{0, 0, bytes.width});
}

void run_loss(LossOpts& o) {
    apply_config(o.cmd, o.config, o.cfg, o.no_inter, o.no_intra);
    const LossParams& params = o.cfg.loss_params;
    params.validate();

    std::optional<double> seg, inter, intra;
    if (!o.p1.empty() || !o.p2.empty() || !o.p3.empty()) {
        if (o.p1.empty() || o.p2.empty() || o.p3.empty() || o.mask.empty()) {
            throw ParamError("cross-layer evaluation needs --p1 --p2 --p3 --mask");
        }
        ConfidenceMap m1 = read_pcm(o.p1);
        ConfidenceMap m2 = read_pcm(o.p2);
        ConfidenceMap m3 = read_pcm(o.p3);
        RasterGrid y = mask_grid_from_png(o.mask);
        seg = bce_loss(m1, y).value;
        inter = inter_loss(m1, m2, m3, y, params).value;
    }
    if (!o.q.empty()) {
        if (o.q.size() != 4 || o.qmask.size() != 4) {
            throw ParamError("overlap evaluation needs --q with 4 maps and --qmask with 4 masks");
        }
        std::array<ConfidenceMap, 4> maps = {read_pcm(o.q[0]), read_pcm(o.q[1]), read_pcm(o.q[2]),
                                             read_pcm(o.q[3])};
        const int size = maps[0].width;
        const int stride = o.stride > 0 ? o.stride : size / 2;
        std::array<RasterGrid, 4> masks = {
            mask_grid_from_png(o.qmask[0]), mask_grid_from_png(o.qmask[1]),
            mask_grid_from_png(o.qmask[2]), mask_grid_from_png(o.qmask[3])};
        IntraLayerGroup group = intra_group_sample(size + stride, size, 0, 0, stride);
        intra = intra_loss(maps, masks, group, params).value;
    }
    if (!seg && !intra) throw ParamError("nothing to evaluate; pass --p1/--p2/--p3/--mask or --q/--qmask");

    json j;
    double total = 0.0;
    if (seg) {
        j["seg"] = *seg;
        total += *seg;
    }
    if (inter) {
        j["inter"] = *inter;
        total += params.alpha_inter * *inter;
    }
    if (intra) {
        j["intra"] = *intra;
        total += params.alpha_intra * *intra;
    }
    j["total"] = total;
    j["alpha_inter"] = params.alpha_inter;
    j["alpha_intra"] = params.alpha_intra;
    emit(j);
}

// ---- gradcheck ----

struct GradcheckOpts {
    int seeds = 200;
    int size = 8;
    double step = 1e-4;
    double tol = 1e-4;
    std::uint64_t seed = 7;
};

void run_gradcheck_cmd(GradcheckOpts& o) {
    GradCheckReport report = run_gradcheck(o.seed, o.seeds, o.size, o.step);
    json checks = json::array();
    for (const GradCheck& c : report.checks) {
        checks.push_back({{"name", c.name}, {"max_rel", c.max_rel}});
    }
    const bool pass = report.pass(o.tol);
    emit({{"rounds", o.seeds},
          {"size", o.size},
          {"step", o.step},
          {"tol", o.tol},
          {"checks", checks},
          {"max_rel", report.max_rel},
          {"pass", pass}});
    if (!pass) throw CheckFailure("gradient check exceeded tolerance");
}

// ---- train ----

struct TrainOpts {
    std::string manifest;
    std::string out;
    std::string train_split = "train";
    std::string heldout_split = "val";
    TrainConfig cfg = cli_defaults();
    std::string config;
    bool no_inter = false, no_intra = false;
    CLI::App* cmd = nullptr;
};

void run_train(TrainOpts& o) {
    apply_config(o.cmd, o.config, o.cfg, o.no_inter, o.no_intra);
    o.cfg.use_inter = !o.no_inter;
    o.cfg.use_intra = !o.no_intra;

    Manifest m = load_manifest(o.manifest);
    const std::string base = fs::path(o.manifest).parent_path().string();
    std::vector<const ManifestEntry*> train_entries = entries_for_split(m, o.train_split);
    std::vector<const ManifestEntry*> heldout_entries =
        o.heldout_split == "none" ? std::vector<const ManifestEntry*>{}
                                  : entries_for_split(m, o.heldout_split);
    if (train_entries.empty()) {
        throw ManifestError("split '" + o.train_split + "' has no entries");
    }

    std::vector<CorpusItem> corpus;
    corpus.reserve(train_entries.size() + heldout_entries.size());
    o.cfg.heldout_ids.clear();
    for (const ManifestEntry* e : train_entries) corpus.push_back(load_item(base, *e));
    for (const ManifestEntry* e : heldout_entries) {
        corpus.push_back(load_item(base, *e));
        o.cfg.heldout_ids.push_back(e->id);
    }

    TrainOutcome outcome = train(corpus, o.cfg);

    fs::create_directories(o.out);
    const std::string ckpt = (fs::path(o.out) / "checkpoint.txt").string();
    const std::string hist = (fs::path(o.out) / "history.csv").string();
    save_checkpoint(outcome.model, ckpt);
    std::ofstream hf(hist, std::ios::binary);
    if (!hf) throw FormatError("cannot open " + hist);
    write_history_csv(hf, outcome.history);

    const EpochStats& last = outcome.history.back();
    json final = {{"seg", last.seg},
                  {"inter", last.inter},
                  {"intra", last.intra},
                  {"total", last.total}};
    final["heldout_iou"] = std::isnan(last.heldout_iou) ? json(nullptr) : json(last.heldout_iou);
    emit({{"checkpoint", ckpt},
          {"history", hist},
          {"epochs", o.cfg.epochs},
          {"train_items", train_entries.size()},
          {"heldout_items", heldout_entries.size()},
          {"use_inter", o.cfg.use_inter},
          {"use_intra", o.cfg.use_intra},
          {"final", final}});
}

// ---- predict ----

struct PredictOpts {
    std::string checkpoint;
    std::string image;
    std::string out;
    std::string preview;
    int stride = 0;
    TrainConfig cfg = cli_defaults();
    std::string config;
    bool no_inter = false, no_intra = false;
    CLI::App* cmd = nullptr;
};

void run_predict(PredictOpts& o) {
    apply_config(o.cmd, o.config, o.cfg, o.no_inter, o.no_intra);
    const ToyModel model = load_checkpoint(o.checkpoint);
    const ByteRaster image = read_png_image(o.image);
    const int tile = o.cfg.spec.tile;
    const int stride = o.stride > 0 ? o.stride : tile;
    const ConfidenceMap map = predict_full(model, image, tile, stride, o.cfg.threads);
    write_pcm(o.out, map);
    json j = {{"width", map.width}, {"height", map.height}, {"tile", tile}, {"stride", stride},
              {"out", o.out}};
    if (!o.preview.empty()) {
        write_png_gray(o.preview, bytes_from_confidence(map));
        j["preview"] = o.preview;
    }
    emit(j);
}

// ---- eval ----

struct EvalOpts {
    std::string manifest;
    std::string checkpoint;
    std::string split = "test";
    std::string out;
    double threshold = 0.5;
    TrainConfig cfg = cli_defaults();
    std::string config;
    bool no_inter = false, no_intra = false;
    CLI::App* cmd = nullptr;
};

void run_eval(EvalOpts& o) {
    apply_config(o.cmd, o.config, o.cfg, o.no_inter, o.no_intra);
    const ToyModel model = load_checkpoint(o.checkpoint);
    Manifest m = load_manifest(o.manifest);
    const std::string base = fs::path(o.manifest).parent_path().string();
    std::vector<const ManifestEntry*> entries = entries_for_split(m, o.split);
    if (entries.empty()) throw ManifestError("split '" + o.split + "' has no entries");
    if (!(o.threshold > 0.0 && o.threshold < 1.0)) throw ParamError("threshold must lie in (0,1)");

    std::vector<std::pair<std::string, Confusion>> rows;
    for (const ManifestEntry* e : entries) {
        const CorpusItem item = load_item(base, *e);
        rows.emplace_back(e->id, eval_item(model, item, o.cfg.spec.tile, o.cfg.threads));
        std::cerr << "evaluated " << e->id << "\n";
    }
    write_metrics_csv(std::cout, rows);
    if (!o.out.empty()) {
        std::ofstream f(o.out, std::ios::binary);
        if (!f) throw FormatError("cannot open " + o.out);
        write_metrics_csv(f, rows);
    }
}

// ---- seam ----

struct SeamOpts {
    std::string manifest;
    std::string checkpoint;
    std::string split = "test";
    int windows = 24;
    int stride = 0;
    TrainConfig cfg = cli_defaults();
    std::string config;
    bool no_inter = false, no_intra = false;
    CLI::App* cmd = nullptr;
};

void run_seam(SeamOpts& o) {
    apply_config(o.cmd, o.config, o.cfg, o.no_inter, o.no_intra);
    const ToyModel model = load_checkpoint(o.checkpoint);
    Manifest m = load_manifest(o.manifest);
    const std::string base = fs::path(o.manifest).parent_path().string();
    std::vector<const ManifestEntry*> entries = entries_for_split(m, o.split);
    if (entries.empty()) throw ManifestError("split '" + o.split + "' has no entries");

    std::vector<CorpusItem> corpus;
    std::vector<std::string> ids;
    for (const ManifestEntry* e : entries) {
        corpus.push_back(load_item(base, *e));
        ids.push_back(e->id);
    }
    const SeamReport report = seam_on_items(model, corpus, ids, o.cfg.spec.tile, o.stride,
                                            o.windows, o.cfg.seed, o.cfg.threads);
    emit({{"split", o.split},
          {"windows", report.windows},
          {"overlap_pixels", report.stats.pixels},
          {"mean_abs_diff", report.mean()}});
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tiled water segmentation toolkit: pyramid grouping, consistency losses, "
                 "toy training, stitched evaluation"};
    app.require_subcommand(1);

    auto synth_opts = std::make_shared<SynthOpts>();
    auto split_opts = std::make_shared<SplitOpts>();
    auto pyramid_opts = std::make_shared<PyramidOpts>();
    auto groups_opts = std::make_shared<GroupsOpts>();
    auto loss_opts = std::make_shared<LossOpts>();
    auto gradcheck_opts = std::make_shared<GradcheckOpts>();
    auto train_opts = std::make_shared<TrainOpts>();
    auto predict_opts = std::make_shared<PredictOpts>();
    auto eval_opts = std::make_shared<EvalOpts>();
    auto seam_opts = std::make_shared<SeamOpts>();

    {
        CLI::App* c = app.add_subcommand("synth", "generate a synthetic labeled corpus");
        c->add_option("--out", synth_opts->out, "output directory")->required();
        c->add_option("--count", synth_opts->count, "number of images");
        c->add_option("--side", synth_opts->side, "image side in pixels");
        c->add_option("--seed", synth_opts->cfg.seed, "corpus seed");
        c->add_option("--threads", synth_opts->cfg.threads, "worker threads");
        c->add_option("--config", synth_opts->config, "JSON config file");
        add_pyramid_flags(c, synth_opts->cfg.spec);
        synth_opts->cmd = c;
        c->callback([synth_opts] { run_synth(*synth_opts); });
    }
    {
        CLI::App* c = app.add_subcommand("split", "assign train/val/test splits");
        c->add_option("--n", split_opts->n, "number of generated ids");
        c->add_option("--manifest", split_opts->manifest, "manifest to split");
        c->add_option("--seed", split_opts->seed, "shuffle seed");
        c->add_flag("--write-back", split_opts->write_back, "store the split in the manifest");
        c->callback([split_opts] { run_split(*split_opts); });
    }
    {
        CLI::App* c = app.add_subcommand("pyramid", "write the downsampled layers of an image");
        c->add_option("--image", pyramid_opts->image, "input image PNG")->required();
        c->add_option("--out", pyramid_opts->out, "output directory")->required();
        c->add_option("--seed", pyramid_opts->cfg.seed, "unused; accepted for uniformity");
        c->add_option("--config", pyramid_opts->config, "JSON config file");
        add_pyramid_flags(c, pyramid_opts->cfg.spec);
        pyramid_opts->cmd = c;
        c->callback([pyramid_opts] { run_pyramid(*pyramid_opts); });
    }
    {
        CLI::App* c = app.add_subcommand("groups", "print group geometry for an anchor tile");
        c->add_option("--side", groups_opts->side, "image side in pixels");
        c->add_option("--row", groups_opts->row, "anchor row origin");
        c->add_option("--col", groups_opts->col, "anchor column origin");
        c->add_option("--stride", groups_opts->stride, "overlap stride (default tile/2)");
        c->add_option("--seed", groups_opts->cfg.seed, "unused; accepted for uniformity");
        c->add_option("--config", groups_opts->config, "JSON config file");
        add_pyramid_flags(c, groups_opts->cfg.spec);
        groups_opts->cmd = c;
        c->callback([groups_opts] { run_groups(*groups_opts); });
    }
    {
        CLI::App* c = app.add_subcommand("loss", "evaluate loss components on stored maps");
        c->add_option("--p1", loss_opts->p1, "full-resolution tile map (PCM1)");
        c->add_option("--p2", loss_opts->p2, "aligned mid-layer map (PCM1)");
        c->add_option("--p3", loss_opts->p3, "aligned coarse-layer map (PCM1)");
        c->add_option("--mask", loss_opts->mask, "tile mask PNG");
        c->add_option("--q", loss_opts->q, "four overlapping window maps (PCM1)")->expected(4);
        c->add_option("--qmask", loss_opts->qmask, "four window masks (PNG)")->expected(4);
        c->add_option("--stride", loss_opts->stride, "window overlap stride (default size/2)");
        c->add_option("--seed", loss_opts->cfg.seed, "unused; accepted for uniformity");
        c->add_option("--config", loss_opts->config, "JSON config file");
        add_loss_flags(c, loss_opts->cfg.loss_params);
        loss_opts->cmd = c;
        c->callback([loss_opts] { run_loss(*loss_opts); });
    }
    {
        CLI::App* c = app.add_subcommand("gradcheck", "finite-difference gradient audit");
        c->add_option("--seeds", gradcheck_opts->seeds, "rounds to run");
        c->add_option("--size", gradcheck_opts->size, "map side");
        c->add_option("--step", gradcheck_opts->step, "finite-difference step");
        c->add_option("--tol", gradcheck_opts->tol, "max relative error allowed");
        c->add_option("--seed", gradcheck_opts->seed, "base seed");
        c->callback([gradcheck_opts] { run_gradcheck_cmd(*gradcheck_opts); });
    }
    {
        CLI::App* c = app.add_subcommand("train", "fit the tile classifier");
        c->add_option("--manifest", train_opts->manifest, "corpus manifest")->required();
        c->add_option("--out", train_opts->out, "output directory")->required();
        c->add_option("--train-split", train_opts->train_split, "split used for updates");
        c->add_option("--heldout-split", train_opts->heldout_split,
                      "split scored per epoch ('none' disables)");
        c->add_option("--seed", train_opts->cfg.seed, "training seed");
        c->add_option("--config", train_opts->config, "JSON config file");
        c->add_option("--lr", train_opts->cfg.learning_rate, "learning rate");
        c->add_option("--epochs", train_opts->cfg.epochs, "training epochs");
        c->add_option("--batch", train_opts->cfg.batch, "samples per update");
        c->add_option("--momentum", train_opts->cfg.momentum, "momentum coefficient");
        c->add_option("--weight-decay", train_opts->cfg.weight_decay, "L2 coefficient");
        c->add_flag("--poly", train_opts->cfg.poly_schedule, "polynomial LR decay");
        c->add_option("--poly-power", train_opts->cfg.poly_power, "poly decay power");
        c->add_flag("--no-inter", train_opts->no_inter, "disable the cross-layer term");
        c->add_flag("--no-intra", train_opts->no_intra, "disable the overlap term");
        c->add_option("--stride", train_opts->cfg.overlap_stride, "overlap stride (0 = tile/2)");
        c->add_option("--samples", train_opts->cfg.samples_per_image, "samples per image per epoch");
        c->add_option("--threads", train_opts->cfg.threads, "worker threads");
        c->add_option("--eval-tiles", train_opts->cfg.heldout_eval_tiles,
                      "held-out tiles scored per epoch");
        add_loss_flags(c, train_opts->cfg.loss_params);
        add_pyramid_flags(c, train_opts->cfg.spec);
        train_opts->cmd = c;
        c->callback([train_opts] { run_train(*train_opts); });
    }
    {
        CLI::App* c = app.add_subcommand("predict", "stitched full-image confidence map");
        c->add_option("--checkpoint", predict_opts->checkpoint, "model checkpoint")->required();
        c->add_option("--image", predict_opts->image, "input image PNG")->required();
        c->add_option("--out", predict_opts->out, "output confidence map (PCM1)")->required();
        c->add_option("--preview", predict_opts->preview, "optional grayscale preview PNG");
        c->add_option("--stride", predict_opts->stride, "window stride (default tile)");
        c->add_option("--threads", predict_opts->cfg.threads, "worker threads");
        c->add_option("--seed", predict_opts->cfg.seed, "unused; accepted for uniformity");
        c->add_option("--config", predict_opts->config, "JSON config file");
        add_pyramid_flags(c, predict_opts->cfg.spec);
        predict_opts->cmd = c;
        c->callback([predict_opts] { run_predict(*predict_opts); });
    }
    {
        CLI::App* c = app.add_subcommand("eval", "metrics CSV over a manifest split");
        c->add_option("--manifest", eval_opts->manifest, "corpus manifest")->required();
        c->add_option("--checkpoint", eval_opts->checkpoint, "model checkpoint")->required();
        c->add_option("--split", eval_opts->split, "split to score");
        c->add_option("--out", eval_opts->out, "also write the CSV here");
        c->add_option("--threshold", eval_opts->threshold, "binarization threshold");
        c->add_option("--threads", eval_opts->cfg.threads, "worker threads");
        c->add_option("--seed", eval_opts->cfg.seed, "unused; accepted for uniformity");
        c->add_option("--config", eval_opts->config, "JSON config file");
        add_pyramid_flags(c, eval_opts->cfg.spec);
        eval_opts->cmd = c;
        c->callback([eval_opts] { run_eval(*eval_opts); });
    }
    {
        CLI::App* c = app.add_subcommand("seam", "overlap disagreement report");
        c->add_option("--manifest", seam_opts->manifest, "corpus manifest")->required();
        c->add_option("--checkpoint", seam_opts->checkpoint, "model checkpoint")->required();
        c->add_option("--split", seam_opts->split, "split to probe");
        c->add_option("--windows", seam_opts->windows, "windows sampled per image");
        c->add_option("--stride", seam_opts->stride, "overlap stride (0 = tile/2)");
        c->add_option("--threads", seam_opts->cfg.threads, "worker threads");
        c->add_option("--seed", seam_opts->cfg.seed, "window sampling seed");
        c->add_option("--config", seam_opts->config, "JSON config file");
        add_pyramid_flags(c, seam_opts->cfg.spec);
        seam_opts->cmd = c;
        c->callback([seam_opts] { run_seam(*seam_opts); });
    }

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const CheckFailure& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
