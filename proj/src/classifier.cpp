#include "courtside/classifier.hpp"

#include "courtside/errors.hpp"
#include "courtside/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace courtside {

namespace {

std::vector<std::string> term_lemmas(std::string_view term) {
    std::vector<std::string> out;
    for (const auto& t : text::tokenize(term)) out.push_back(text::lemma(t.text));
    return out;
}

bool contains_sequence(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > hay.size()) return false;
    return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

double norm(const std::vector<double>& v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

} // namespace

CategoryLexicons::CategoryLexicons(std::array<std::vector<std::string>, kCategoryCount> terms)
    : raw_(std::move(terms)) {
    for (std::size_t c = 0; c < kCategoryCount; ++c)
        for (const auto& t : raw_[c]) {
            auto l = term_lemmas(t);
            if (!l.empty()) lemmatized_[c].push_back(std::move(l));
        }
}

CategoryLexicons CategoryLexicons::load(const std::filesystem::path& dir) {
    std::array<std::vector<std::string>, kCategoryCount> terms;
    for (auto c : kAllCategories)
        terms[category_index(c)] = text::read_term_file(dir / (std::string(to_string(c)) + ".txt"));
    return CategoryLexicons(std::move(terms));
}

CategoryVector CategoryLexicons::flags(std::string_view s) const {
    const auto l = text::lemmas(s);
    CategoryVector f{};
    for (std::size_t c = 0; c < kCategoryCount; ++c)
        for (const auto& term : lemmatized_[c])
            if (contains_sequence(l, term)) {
                f[c] = 1.0;
                break;
            }
    return f;
}

QueryFeatures extract_features(std::string_view s, const CategoryLexicons& lexicons,
                               const EmbeddingProvider& embedder) {
    QueryFeatures f;
    f.keyword_flags = lexicons.flags(s);
    try {
        f.embedding = embedder.embed(s);
    } catch (const std::exception&) {
        f.embedding.assign(embedder.dimension(), 0.0);
        f.degraded = true;
    }
    return f;
}

std::optional<double> top_zscore(const CategoryVector& p) {
    const double n = static_cast<double>(p.size());
    const double mean = std::accumulate(p.begin(), p.end(), 0.0) / n;
    double var = 0;
    for (double x : p) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / n);
    if (!(sd > 1e-12)) return std::nullopt;
    return (*std::max_element(p.begin(), p.end()) - mean) / sd;
}

std::vector<LabeledQuestion> load_exemplars(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot open exemplar file " + path.string());
    std::vector<LabeledQuestion> out;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        const auto t = text::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto tab = t.find('\t');
        if (tab == std::string::npos) throw ParseError("expected label<TAB>text", line_no);
        try {
            out.push_back({category_from_string(t.substr(0, tab)), text::trim(t.substr(tab + 1))});
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return out;
}

NearestCentroidModel::NearestCentroidModel(const std::vector<LabeledQuestion>& exemplars,
                                           const CategoryLexicons& lexicons,
                                           const EmbeddingProvider& embedder, Params params)
    : params_(params) {
    if (params_.temperature <= 0) throw ConfigurationError("temperature must be positive");
    std::array<std::size_t, kCategoryCount> counts{};
    for (const auto& ex : exemplars) {
        const auto v = vectorize(extract_features(ex.text, lexicons, embedder));
        auto& c = centroids_[category_index(ex.label)];
        if (c.empty()) c.assign(v.size(), 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) c[i] += v[i];
        ++counts[category_index(ex.label)];
    }
    for (std::size_t k = 0; k < kCategoryCount; ++k) {
        if (counts[k] == 0)
            throw ConfigurationError("no exemplars for category " +
                                     std::string(to_string(kAllCategories[k])));
        for (double& x : centroids_[k]) x /= static_cast<double>(counts[k]);
    }
}

std::vector<double> NearestCentroidModel::vectorize(const QueryFeatures& f) const {
    std::vector<double> v;
    v.reserve(kCategoryCount + f.embedding.size());
    for (double flag : f.keyword_flags) v.push_back(params_.keyword_weight * flag);
    v.insert(v.end(), f.embedding.begin(), f.embedding.end());
    return v;
}

CategoryVector NearestCentroidModel::similarities(const QueryFeatures& f) const {
    const auto v = vectorize(f);
    const double nv = norm(v);
    CategoryVector s{};
    for (std::size_t k = 0; k < kCategoryCount; ++k) {
        const auto& c = centroids_[k];
        if (c.size() != v.size()) throw ConfigurationError("feature dimension differs from the model");
        const double nc = norm(c);
        s[k] = (nv == 0 || nc == 0) ? 0.0 : std::inner_product(v.begin(), v.end(), c.begin(), 0.0) / (nv * nc);
    }
    return s;
}

CategoryVector NearestCentroidModel::predict(const QueryFeatures& f) const {
    auto s = similarities(f);
    for (double& x : s)
        if (x < params_.similarity_floor) x = 0.0;
    const double top = *std::max_element(s.begin(), s.end());
    CategoryVector p{};
    for (std::size_t k = 0; k < kCategoryCount; ++k) p[k] = std::exp((s[k] - top) / params_.temperature);
    return p;
}

ClassifierOutput classify(const QueryFeatures& features, const ClassifierModel* model, double threshold) {
    CategoryVector p{};
    if (model) {
        p = model->predict(features);
    } else {
        p = features.keyword_flags;
    }
    double sum = std::accumulate(p.begin(), p.end(), 0.0);
    if (!(sum > 0) || !std::isfinite(sum)) {
        p.fill(1.0);
        sum = static_cast<double>(kCategoryCount);
    }
    for (double& x : p) x /= sum;

    ClassifierOutput out;
    out.probabilities = p;
    out.top_category = kAllCategories[static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())];
    const auto z = top_zscore(p);
    out.top_zscore = z.value_or(0.0);
    out.abstained = !z || *z < threshold;
    return out;
}

std::optional<QueryCategory> route(const ClassifierOutput& output, double threshold) {
    const auto z = top_zscore(output.probabilities);
    if (!z || *z < threshold) return std::nullopt;
    return output.top_category;
}

QueryClassifier::QueryClassifier(CategoryLexicons lexicons, std::shared_ptr<const EmbeddingProvider> embedder,
                                 std::shared_ptr<const ClassifierModel> model, double threshold)
    : lexicons_(std::move(lexicons)), embedder_(std::move(embedder)), model_(std::move(model)),
      threshold_(threshold) {
    if (!embedder_) throw ConfigurationError("classifier needs an embedding provider");
}

QueryClassifier QueryClassifier::load(const std::filesystem::path& dir,
                                      std::shared_ptr<const EmbeddingProvider> embedder, double threshold) {
    auto lexicons = CategoryLexicons::load(dir / "lexicons");
    const auto exemplars = load_exemplars(dir / "exemplars.tsv");
    auto model = std::make_shared<NearestCentroidModel>(exemplars, lexicons, *embedder);
    return QueryClassifier(std::move(lexicons), std::move(embedder), std::move(model), threshold);
}

ClassifierOutput QueryClassifier::classify(std::string_view s) const {
    return courtside::classify(extract_features(s, lexicons_, *embedder_), model_.get(), threshold_);
}

nlohmann::json to_json(const ClassifierOutput& out) {
    nlohmann::json probs = nlohmann::json::object();
    for (auto c : kAllCategories) probs[std::string(to_string(c))] = out.probabilities[category_index(c)];
    return {{"probabilities", probs},
            {"top_category", to_string(out.top_category)},
            {"top_zscore", out.top_zscore},
            {"abstained", out.abstained}};
}

} // namespace courtside
