#pragma once

#include "courtside/category.hpp"
#include "courtside/providers.hpp"

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace courtside {

using CategoryVector = std::array<double, kCategoryCount>;

/// Per-category keyword lists, matched as lemma sequences on token
/// boundaries.
class CategoryLexicons {
public:
    CategoryLexicons() = default;
    explicit CategoryLexicons(std::array<std::vector<std::string>, kCategoryCount> terms);

    /// Reads `<CategoryName>.txt` for each category from `dir`.
    static CategoryLexicons load(const std::filesystem::path& dir);

    CategoryVector flags(std::string_view text) const;
    const std::vector<std::string>& terms(QueryCategory c) const { return raw_[category_index(c)]; }

private:
    std::array<std::vector<std::string>, kCategoryCount> raw_;
    std::array<std::vector<std::vector<std::string>>, kCategoryCount> lemmatized_;
};

struct QueryFeatures {
    CategoryVector keyword_flags{};
    Embedding embedding;
    bool degraded = false;  // embedder failed; embedding is all zero
};

QueryFeatures extract_features(std::string_view text, const CategoryLexicons& lexicons,
                               const EmbeddingProvider& embedder);

struct ClassifierOutput {
    CategoryVector probabilities{};
    QueryCategory top_category = QueryCategory::MatchStatistics;
    double top_zscore = 0.0;
    bool abstained = true;
};

/// (p_top - mean) / population stddev; nullopt when all probabilities are equal.
std::optional<double> top_zscore(const CategoryVector& p);

inline constexpr double kDefaultZThreshold = 1.2;

class ClassifierModel {
public:
    virtual ~ClassifierModel() = default;
    /// Unnormalized non-negative scores or probabilities per category.
    virtual CategoryVector predict(const QueryFeatures& features) const = 0;
};

struct LabeledQuestion {
    QueryCategory label;
    std::string text;
};

/// `label<TAB>text` per line; `#` comments. Throws ParseError.
std::vector<LabeledQuestion> load_exemplars(const std::filesystem::path& path);

/// Nearest-centroid model over [keyword_weight * flags, embedding] with a
/// temperature softmax over cosine similarities. Similarities below
/// `similarity_floor` are treated as no evidence, so a query sharing nothing
/// with any category gets uniform probabilities.
class NearestCentroidModel : public ClassifierModel {
public:
    struct Params {
        double keyword_weight = 0.6;
        double temperature = 0.08;
        double similarity_floor = 0.15;
    };

    NearestCentroidModel(const std::vector<LabeledQuestion>& exemplars, const CategoryLexicons& lexicons,
                         const EmbeddingProvider& embedder, Params params);
    NearestCentroidModel(const std::vector<LabeledQuestion>& exemplars, const CategoryLexicons& lexicons,
                         const EmbeddingProvider& embedder)
        : NearestCentroidModel(exemplars, lexicons, embedder, Params{}) {}

    CategoryVector predict(const QueryFeatures& features) const override;
    CategoryVector similarities(const QueryFeatures& features) const;

private:
    std::vector<double> vectorize(const QueryFeatures& f) const;

    Params params_;
    std::array<std::vector<double>, kCategoryCount> centroids_;
};

/// Probabilities from `model` (keyword-only fallback when null), normalized
/// to sum to 1, with the abstention flag evaluated at `threshold`.
ClassifierOutput classify(const QueryFeatures& features, const ClassifierModel* model,
                          double threshold = kDefaultZThreshold);

/// Category when the top z-score clears the threshold, nullopt meaning the
/// knowledge base otherwise.
std::optional<QueryCategory> route(const ClassifierOutput& output, double threshold = kDefaultZThreshold);

/// Lexicons, embedder and model bundled for text-in classification.
class QueryClassifier {
public:
    QueryClassifier(CategoryLexicons lexicons, std::shared_ptr<const EmbeddingProvider> embedder,
                    std::shared_ptr<const ClassifierModel> model, double threshold = kDefaultZThreshold);

    /// Loads `lexicons/` and `exemplars.tsv` from `dir` and trains the
    /// nearest-centroid model.
    static QueryClassifier load(const std::filesystem::path& dir,
                                std::shared_ptr<const EmbeddingProvider> embedder,
                                double threshold = kDefaultZThreshold);

    ClassifierOutput classify(std::string_view text) const;
    double threshold() const noexcept { return threshold_; }
    const CategoryLexicons& lexicons() const noexcept { return lexicons_; }

private:
    CategoryLexicons lexicons_;
    std::shared_ptr<const EmbeddingProvider> embedder_;
    std::shared_ptr<const ClassifierModel> model_;
    double threshold_;
};

nlohmann::json to_json(const ClassifierOutput& out);

} // namespace courtside
