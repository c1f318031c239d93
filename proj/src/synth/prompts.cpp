#include "synth/prompts.hpp"

#include <array>

#include "json.hpp"

namespace mgh::synth {
namespace {

struct BrainstormFlavor {
  std::string_view kind;      // "... a list of potentially useful <kind>."
  std::string_view example1;
  std::string_view example2;
  std::string_view noun;      // "... a distinct <noun> in one sentence"
};

BrainstormFlavor flavor(TaskCategory c) {
  switch (c) {
    case TaskCategory::short_long:
      return {"text retrieval tasks",
              "Retrieve relevant documents for a short keyword web search query that asks for "
              "weather information.",
              "Search for documents that answers a FAQ-style query on children's nutrition.",
              "retrieval task"};
    case TaskCategory::long_short:
      return {"text matching tasks where a long input text is paired with a short label, title "
              "or summary",
              "Given a product review, find the short category label that describes it.",
              "Given a news article, find its headline.", "matching task"};
    case TaskCategory::long_long:
      return {"text matching tasks where a long document is paired with other long documents",
              "Given a research abstract, find papers that build on the same method.",
              "Given a legal contract, find contracts with equivalent clauses.", "matching task"};
    case TaskCategory::short_short:
      return {"text matching tasks where a short query is paired with short texts",
              "Given a search phrase, find related short questions.",
              "Given a product name, find alternative product names.", "matching task"};
    case TaskCategory::sts:
      return {"semantic textual similarity tasks where two texts express the same meaning with "
              "different wording",
              "Find paraphrases of a customer support question.",
              "Find sentences restating a scientific claim.", "similarity task"};
  }
  return {};
}

std::string number_word(std::size_t n) {
  static constexpr std::array<std::string_view, 10> kWords = {
      "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"};
  return n < kWords.size() ? std::string(kWords[n]) : std::to_string(n);
}

std::string slot_name(std::size_t k, std::size_t num_levels) {
  if (num_levels == 4) {
    static constexpr std::array<std::string_view, 4> kNames = {
        "HIGH_SIMILARITY", "MEDIUM_HIGH_SIMILARITY", "MEDIUM_LOW_SIMILARITY", "LOW_SIMILARITY"};
    return std::string(kNames[k]) + "_NEGATIVE_EXAMPLE_TEXT";
  }
  return "LEVEL_" + std::to_string(k + 1) + "_SIMILARITY_NEGATIVE_EXAMPLE_TEXT";
}

std::string negative_block(std::size_t num_levels, std::string_view indent) {
  const auto tags = level_tags(num_levels);
  std::string out;
  out += std::string(indent) + "\"hard_negative_document\": [\n";
  for (std::size_t k = 0; k < num_levels; ++k) {
    out += std::string(indent) + (k == 0 ? "  {\n" : "  },{\n");
    out += std::string(indent) + "    \"similarity_level\": \"" + tags[k] + "\",\n";
    out += std::string(indent) + "    \"text\": \"" + slot_name(k, num_levels) + "\"\n";
  }
  out += std::string(indent) + "  }\n";
  out += std::string(indent) + "]\n";
  return out;
}

std::string negative_guideline(std::size_t num_levels) {
  return "- The \"hard_negative_document\" contains some useful information, but it should be "
         "less useful or comprehensive compared to the \"positive_document\". Please generate " +
         number_word(num_levels) +
         " hard negative documents for contrastive learning based on the generated query and "
         "positive example. These examples should be arranged in order of decreasing similarity "
         "to the query, ranging from highly similar to dissimilar. Ensure the similarity spans a "
         "broad spectrum, and every negative example should be different, without repeating "
         "words from previous examples.\n";
}

std::string shared_guidelines(const PromptPlaceholders& ph) {
  return "- Both the query and documents should be in " + ph.language +
         ".\n"
         "- Do not provide any explanation in any document on why it is relevant or not relevant "
         "to the query.\n"
         "- Both the query and documents require " +
         ph.difficulty + " level education to understand.\n";
}

constexpr std::string_view kClosing =
    "\nYour output must always be a JSON object only, do not explain yourself or output "
    "anything else. Be creative!";

}  // namespace

std::string render_brainstorm_prompt(TaskCategory category) {
  const auto f = flavor(category);
  std::string out;
  out += "Brainstorm a list of potentially useful " + std::string(f.kind) + ".\n\n";
  out += "Here are a few examples for your reference:\n";
  out += "- " + std::string(f.example1) + "\n";
  out += "- " + std::string(f.example2) + "\n\n";
  out += "Please adhere to the following guidelines:\n";
  out += "- Specify what the query is, and what the desired documents are.\n";
  out += "- Each " + std::string(f.noun) +
         " should cover a wide range of queries, and should not be too specific.\n\n";
  out += "Your output must always be a python list of strings only, with about 20 elements, and "
         "each element corresponds to a distinct " +
         std::string(f.noun) +
         " in one sentence. Do not explain yourself or output anything else. Be creative!";
  return out;
}

std::string render_prompt(const TaskSpec& task, const PromptPlaceholders& ph,
                          std::size_t num_levels) {
  std::string out;
  out += std::string(kStage2Opening) + task.description + "\n\n";
  out += "Your mission is to write one text retrieval example for this task in the following "
         "JSON format. The JSON object must contain the following keys:\n";
  out += "- \"user_query\": a string, a random user search query specified by the retrieval "
         "task.\n";
  out += "- \"positive_document\": a string, a relevant document for the user query.\n";
  out += "- \"hard_negative_document\": a list of strings, hard negative documents that only "
         "appears relevant to the query.\n\n";
  out += "The output should be formatted as a JSON object with a field indicating the relative "
         "similarity level of hard negative examples. Use the following format as a guide:\n\n";
  out += "{\n";
  out += "  \"user_query\": \"QUERY_TEXT\",\n";
  out += "  \"positive_document\": \"POSITIVE_EXAMPLE_TEXT\",\n";
  out += negative_block(num_levels, "  ");
  out += "}\n\n";
  out += "Please adhere to the following guidelines:\n";
  out += "- The \"user_query\" should be " + ph.query_type + ", " + ph.query_length + ", " +
         ph.clarity + ", and diverse in topic.\n";
  out += "- All documents must be created independent of the query. Avoid copying the query "
         "verbatim. It's acceptable if some parts of the \"positive_document\" are not "
         "topically related to the query.\n";
  out += "- All documents should be at least " + std::to_string(ph.num_words) + " words long.\n";
  out += negative_guideline(num_levels);
  out += shared_guidelines(ph);
  out += kClosing;
  return out;
}

std::string render_augment_prompt(const TaskSpec& task, std::string_view query,
                                  std::string_view positive, const PromptPlaceholders& ph,
                                  std::size_t num_levels) {
  const nlohmann::json example = {{"user_query", query}, {"positive_document", positive}};
  std::string out;
  out += std::string(kStage2Opening) + task.description + "\n\n";
  out += std::string(kAugmentExampleIntro) + "\n";
  out += example.dump() + "\n\n";
  out += "Your mission is to write hard negative documents for this example in the following "
         "JSON format. The JSON object must contain the following key:\n";
  out += "- \"hard_negative_document\": a list of strings, hard negative documents that only "
         "appears relevant to the query.\n\n";
  out += "The output should be formatted as a JSON object with a field indicating the relative "
         "similarity level of hard negative examples. Use the following format as a guide:\n\n";
  out += "{\n";
  out += negative_block(num_levels, "  ");
  out += "}\n\n";
  out += "Please adhere to the following guidelines:\n";
  out += "- All documents should be at least " + std::to_string(ph.num_words) + " words long.\n";
  out += negative_guideline(num_levels);
  out += shared_guidelines(ph);
  out += kClosing;
  return out;
}

}  // namespace mgh::synth
