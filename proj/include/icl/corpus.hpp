#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace icl {

enum class Provenance { Original, Synthetic };
enum class TaskKind { Translation, Summarization, Reasoning, Classification };
enum class MetricId { ChrF, RougeL, ExactMatch };
enum class TokenCountMethod { Heuristic, BackendReported };

/// One demonstration pair: the unit of selection, augmentation and prompting.
struct Example {
  std::string id;
  std::string input;
  std::string output;
  std::map<std::string, std::string> meta;
  Provenance provenance = Provenance::Original;
};

struct TaskSpec {
  TaskKind task_kind = TaskKind::Classification;
  std::string template_id;
  MetricId metric_id = MetricId::ExactMatch;
  std::optional<std::string> source_language;
  std::optional<std::string> target_language;

  // Throws InvalidArgument when languages or the metric binding are
  // inconsistent with the task kind.
  void validate() const;
};

struct ExamplePool {
  std::vector<Example> examples;
  TaskSpec task;

  std::size_t size() const { return examples.size(); }
  const Example* find(const std::string& id) const;
};

/// A task prompt template. `body` carries {EXAMPLES} and {TARGET_QUERY}
/// exactly once; `example_format` carries {input} and {output} plus any
/// language placeholders.
struct PromptTemplate {
  std::string template_id;
  std::string body;
  std::string example_format;
};

struct TokenCount {
  std::uint64_t value = 0;
  TokenCountMethod method = TokenCountMethod::Heuristic;
};

ExamplePool load_dataset(const std::string& path, const TaskSpec& task);
void save_pool(const ExamplePool& pool, const std::string& path);

/// Renders one example through `example_format` (demo role: both fields).
std::string render_example(const PromptTemplate& tmpl, const TaskSpec& task,
                           const Example& example);

/// Renders the query role: the format lines strictly before the first line
/// that contains {output}.
std::string render_query(const PromptTemplate& tmpl, const TaskSpec& task,
                         const Example& query);

// A rendered prompt split at the query boundary. `prefix` is byte-identical
// across queries whenever the demo sequence is, which is the property the
// runner asserts for query-independent selection plans.
struct RenderedPrompt {
  std::string prefix;
  std::string query;
  std::string suffix;

  std::string text() const { return prefix + query + suffix; }
};

RenderedPrompt render_prompt_parts(const PromptTemplate& tmpl,
                                   const TaskSpec& task,
                                   const std::vector<Example>& demos,
                                   const Example& query);

std::string render_prompt(const PromptTemplate& tmpl, const TaskSpec& task,
                          const std::vector<Example>& demos,
                          const Example& query);

/// Substitutes {SOURCE_LANGUAGE}/{TARGET_LANGUAGE} from the task spec,
/// leaving every other placeholder untouched.
std::string render_language_placeholders(const std::string& text,
                                         const TaskSpec& task);

/// Heuristic token count: ceil(codepoints / 4).
TokenCount count_tokens(const std::string& text);

// --- Template registry -----------------------------------------------------
//
// Task templates ship as data files under templates/ and are mirrored here
// verbatim so the library works without a data directory. A unit test pins
// the two copies to byte equality.

const PromptTemplate& builtin_template(const std::string& template_id);
std::vector<std::string> builtin_template_ids();

// Auxiliary rating/generation templates (not task templates; they use
// {EXAMPLES}, {GENERATED_SAMPLE} and {TARGET_SAMPLE} placeholders).
const std::string& generation_template();
const std::string& filtering_template();
const std::string& difficulty_template();

PromptTemplate load_template_dir(const std::string& dir,
                                 const std::string& template_id);

}  // namespace icl
