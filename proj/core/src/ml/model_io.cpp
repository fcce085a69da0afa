#include "ddx/ml/model_io.hpp"

#include <cstring>
#include <fstream>

namespace ddx {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'D', 'D', 'X', 'M', 'D', 'L', '1', '\n'};

void write_file(const std::string& path, const json& meta,
                const std::vector<const std::vector<float>*>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io", "cannot open '" + path + "' for writing");
    out.write(kMagic, sizeof(kMagic));
    std::string meta_text = meta.dump();
    std::uint64_t len = meta_text.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(meta_text.data(), static_cast<std::streamsize>(meta_text.size()));
    for (const auto* t : tensors)
        out.write(reinterpret_cast<const char*>(t->data()),
                  static_cast<std::streamsize>(t->size() * sizeof(float)));
    if (!out) fail("io", "failed writing '" + path + "'");
}

json read_header(std::ifstream& in, const std::string& path) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        fail("parse", "'" + path + "' is not a model file");
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (!in) fail("parse", "'" + path + "' is truncated");
    std::string meta_text(len, '\0');
    in.read(meta_text.data(), static_cast<std::streamsize>(len));
    if (!in) fail("parse", "'" + path + "' is truncated");
    try {
        return json::parse(meta_text);
    } catch (const json::exception& e) {
        fail("parse", "'" + path + "' metadata is invalid: " + std::string(e.what()));
    }
}

void read_tensor(std::ifstream& in, const std::string& path, std::vector<float>& t,
                 std::size_t expected) {
    t.resize(expected);
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(expected * sizeof(float)));
    if (!in) fail("parse", "'" + path + "' is truncated");
}

} // namespace

void save_lr_model(const LRModel& model, const std::string& path, const json& extra_meta) {
    json meta;
    meta["kind"] = "lr";
    meta["n_classes"] = model.n_classes;
    meta["n_features"] = model.n_features;
    meta["lambda"] = model.lambda;
    if (!extra_meta.empty()) meta["provenance"] = extra_meta;
    write_file(path, meta, {&model.weights, &model.bias});
}

void save_convnet_model(const ConvNet& model, const std::string& path, const json& extra_meta) {
    json meta;
    meta["kind"] = "convnet";
    meta["config"] = model.cfg.to_json();
    if (!extra_meta.empty()) meta["provenance"] = extra_meta;
    auto groups = model.param_groups();
    std::vector<const std::vector<float>*> tensors(groups.begin(), groups.end());
    write_file(path, meta, tensors);
}

ModelKind peek_model_kind(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io", "cannot open model file '" + path + "'");
    json meta = read_header(in, path);
    std::string kind = meta.value("kind", "");
    if (kind == "lr") return ModelKind::lr;
    if (kind == "convnet") return ModelKind::convnet;
    fail("parse", "'" + path + "' has unknown model kind '" + kind + "'");
}

LRModel load_lr_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io", "cannot open model file '" + path + "'");
    json meta = read_header(in, path);
    if (meta.value("kind", "") != "lr") fail("parse", "'" + path + "' is not an lr model");
    LRModel model = make_lr_model<float>(meta.at("n_classes").get<int>(),
                                         meta.at("n_features").get<int>(),
                                         meta.at("lambda").get<double>());
    read_tensor(in, path, model.weights,
                static_cast<std::size_t>(model.n_classes) * static_cast<std::size_t>(model.n_features));
    read_tensor(in, path, model.bias, static_cast<std::size_t>(model.n_classes));
    return model;
}

ConvNet load_convnet_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io", "cannot open model file '" + path + "'");
    json meta = read_header(in, path);
    if (meta.value("kind", "") != "convnet") fail("parse", "'" + path + "' is not a convnet model");
    ConvNetConfig cfg = ConvNetConfig::from_json(meta.at("config"));
    ConvNet model = init_convnet<float>(cfg, 0); // sizes only; tensors overwritten below
    for (auto* group : model.param_groups()) read_tensor(in, path, *group, group->size());
    return model;
}

} // namespace ddx
