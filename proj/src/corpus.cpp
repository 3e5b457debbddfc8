#include "icl/corpus.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "icl/common.hpp"

namespace icl {

namespace {

using nlohmann::json;

std::string substitute(const std::string& text,
                       const std::map<std::string, std::string>& values,
                       const TaskSpec& task) {
  // Single left-to-right pass so substituted content is never re-expanded.
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '{') {
      out.push_back(text[i]);
      ++i;
      continue;
    }
    const std::size_t close = text.find('}', i);
    if (close == std::string::npos) {
      out.append(text, i, std::string::npos);
      break;
    }
    const std::string key = text.substr(i + 1, close - i - 1);
    if (key == "SOURCE_LANGUAGE" || key == "TARGET_LANGUAGE") {
      const auto& lang = key == "SOURCE_LANGUAGE" ? task.source_language
                                                  : task.target_language;
      if (!lang.has_value()) {
        throw Error(ErrorKind::MissingPlaceholderValue,
                    "template requires {" + key + "} but the task spec does not define it");
      }
      out.append(*lang);
      i = close + 1;
      continue;
    }
    const auto it = values.find(key);
    if (it != values.end()) {
      out.append(it->second);
      i = close + 1;
      continue;
    }
    // Unknown braces (e.g. literal text) pass through untouched.
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0;
  std::size_t pos = text.find(needle);
  while (pos != std::string::npos) {
    ++count;
    pos = text.find(needle, pos + needle.size());
  }
  return count;
}

void validate_template(const PromptTemplate& tmpl) {
  if (count_occurrences(tmpl.body, "{EXAMPLES}") != 1 ||
      count_occurrences(tmpl.body, "{TARGET_QUERY}") != 1) {
    throw Error(ErrorKind::InvalidArgument,
                "template '" + tmpl.template_id +
                    "' must contain {EXAMPLES} and {TARGET_QUERY} exactly once");
  }
  if (tmpl.example_format.find("{input}") == std::string::npos ||
      tmpl.example_format.find("{output}") == std::string::npos) {
    throw Error(ErrorKind::InvalidArgument,
                "example format of '" + tmpl.template_id +
                    "' must contain {input} and {output}");
  }
}

}  // namespace

void TaskSpec::validate() const {
  if (task_kind == TaskKind::Translation) {
    if (!source_language.has_value() || !target_language.has_value()) {
      throw Error(ErrorKind::InvalidArgument,
                  "translation tasks require source and target languages");
    }
    if (metric_id != MetricId::ChrF) {
      throw Error(ErrorKind::InvalidArgument, "translation tasks use the ChrF metric");
    }
  } else if (task_kind == TaskKind::Summarization) {
    if (metric_id != MetricId::RougeL) {
      throw Error(ErrorKind::InvalidArgument, "summarization tasks use the RougeL metric");
    }
  } else if (metric_id != MetricId::ExactMatch) {
    throw Error(ErrorKind::InvalidArgument,
                "reasoning/classification tasks use the ExactMatch metric");
  }
}

const Example* ExamplePool::find(const std::string& id) const {
  for (const Example& e : examples) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

ExamplePool load_dataset(const std::string& path, const TaskSpec& task) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open dataset file: " + path);
  }
  ExamplePool pool;
  pool.task = task;
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object() ||
        !record.contains("id") || !record["id"].is_string() ||
        !record.contains("input") || !record["input"].is_string() ||
        !record.contains("output") || !record["output"].is_string()) {
      throw Error(ErrorKind::MalformedRecord,
                  "malformed record at line " + std::to_string(line_no) + " of " + path);
    }
    Example e;
    e.id = record["id"].get<std::string>();
    e.input = record["input"].get<std::string>();
    e.output = record["output"].get<std::string>();
    if (e.id.empty() || e.input.empty()) {
      throw Error(ErrorKind::MalformedRecord,
                  "malformed record at line " + std::to_string(line_no) + " of " + path);
    }
    if (record.contains("meta")) {
      if (!record["meta"].is_object()) {
        throw Error(ErrorKind::MalformedRecord,
                    "malformed record at line " + std::to_string(line_no) + " of " + path);
      }
      for (const auto& [k, v] : record["meta"].items()) {
        if (!v.is_string()) {
          throw Error(ErrorKind::MalformedRecord,
                      "malformed record at line " + std::to_string(line_no) + " of " + path);
        }
        e.meta[k] = v.get<std::string>();
      }
    }
    if (record.contains("provenance") && record["provenance"].is_string() &&
        record["provenance"].get<std::string>() == "synthetic") {
      e.provenance = Provenance::Synthetic;
    }
    if (auto [it, inserted] = seen.emplace(e.id, line_no); !inserted) {
      throw Error(ErrorKind::DuplicateId,
                  "duplicate id '" + e.id + "' at line " + std::to_string(line_no));
    }
    pool.examples.push_back(std::move(e));
  }
  if (pool.examples.empty()) {
    throw Error(ErrorKind::EmptyDataset, "dataset is empty: " + path);
  }
  return pool;
}

void save_pool(const ExamplePool& pool, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::Io, "cannot write dataset file: " + path);
  }
  for (const Example& e : pool.examples) {
    json record{{"id", e.id}, {"input", e.input}, {"output", e.output}};
    if (!e.meta.empty()) record["meta"] = e.meta;
    if (e.provenance == Provenance::Synthetic) record["provenance"] = "synthetic";
    out << record.dump() << '\n';
  }
}

std::string render_example(const PromptTemplate& tmpl, const TaskSpec& task,
                           const Example& example) {
  return substitute(tmpl.example_format,
                    {{"input", example.input}, {"output", example.output}}, task);
}

std::string render_query(const PromptTemplate& tmpl, const TaskSpec& task,
                         const Example& query) {
  // Keep the format lines strictly before the first line holding {output}.
  std::istringstream lines(tmpl.example_format);
  std::string line;
  std::string kept;
  while (std::getline(lines, line)) {
    if (line.find("{output}") != std::string::npos) break;
    if (!kept.empty()) kept.push_back('\n');
    kept += line;
  }
  if (kept.empty()) {
    throw Error(ErrorKind::InvalidArgument,
                "example format of '" + tmpl.template_id +
                    "' has no query line before {output}");
  }
  return substitute(kept, {{"input", query.input}}, task);
}

RenderedPrompt render_prompt_parts(const PromptTemplate& tmpl,
                                   const TaskSpec& task,
                                   const std::vector<Example>& demos,
                                   const Example& query) {
  validate_template(tmpl);
  if (query.input.empty()) {
    throw Error(ErrorKind::EmptyInput, "query input must be nonempty");
  }
  std::string demo_block;
  for (std::size_t i = 0; i < demos.size(); ++i) {
    if (i > 0) demo_block += "\n\n";
    demo_block += render_example(tmpl, task, demos[i]);
  }
  const std::size_t query_pos = tmpl.body.find("{TARGET_QUERY}");
  RenderedPrompt out;
  out.prefix = substitute(tmpl.body.substr(0, query_pos), {{"EXAMPLES", demo_block}}, task);
  out.query = render_query(tmpl, task, query);
  out.suffix = substitute(tmpl.body.substr(query_pos + 14), {{"EXAMPLES", demo_block}}, task);
  return out;
}

std::string render_prompt(const PromptTemplate& tmpl, const TaskSpec& task,
                          const std::vector<Example>& demos,
                          const Example& query) {
  return render_prompt_parts(tmpl, task, demos, query).text();
}

std::string render_language_placeholders(const std::string& text,
                                         const TaskSpec& task) {
  return substitute(text, {}, task);
}

TokenCount count_tokens(const std::string& text) {
  TokenCount count;
  count.method = TokenCountMethod::Heuristic;
  count.value = (utf8_length(text) + 3) / 4;
  return count;
}

// --- Template registry -----------------------------------------------------

namespace {

const std::map<std::string, PromptTemplate>& template_registry() {
  static const std::map<std::string, PromptTemplate> registry = [] {
    std::map<std::string, PromptTemplate> reg;
    auto add = [&reg](const std::string& id, std::string body, std::string fmt) {
      reg[id] = PromptTemplate{id, std::move(body), std::move(fmt)};
    };

    add("translation",
        R"TPL(You are an expert translator. I am going to give you one or more example pairs of text snippets where the first is in {SOURCE_LANGUAGE} and the second is a translation of the first snippet into {TARGET_LANGUAGE}.

The sentences will be written as the following format:
{SOURCE_LANGUAGE}: <first sentence>
{TARGET_LANGUAGE}: <translated first sentence>

After the example pairs, I am going to provide another sentence in {SOURCE_LANGUAGE} and I want you to translate it into {TARGET_LANGUAGE}. Give only the translation, and no extra commentary, formatting, or chattiness. Translate the text from {SOURCE_LANGUAGE} to {TARGET_LANGUAGE}.

{EXAMPLES}

{TARGET_QUERY})TPL",
        "{SOURCE_LANGUAGE}: {input}\n{TARGET_LANGUAGE}: {output}");

    add("summarization",
        R"TPL(You are an expert in article summarization. I am going to give you one or more example pairs of article and its summary in fluent English.

The pairs will be written as the following format:
Article: <article>
Summary: <summary>

After the example pairs, I am going to provide another article and I want you to summarize it. Give only the summary, and no extra commentary, formatting, or chattiness.

{EXAMPLES}

{TARGET_QUERY})TPL",
        "Article: {input}\nSummary: {output}");

    add("reasoning",
        R"TPL(You are an expert in multiple-choice question answering tasks. I am going to give you one or more example pairs of question and its answer in a multiple-choice question answering format.

The pairs will be written as the following format:
Question: <question>
Answer: <answer>

After the example pairs, I am going to provide another question and I want you to predict its answer. Give only the answer that follows a consistent format as in the provided examples, and no extra commentary, formatting, or chattiness.

{EXAMPLES}

{TARGET_QUERY})TPL",
        "Question: {input}\nAnswer: {output}");

    add("banking77",
        R"TPL(I am going to give you one or more example pairs of customer service query and its intent.

The pairs will be written as the following format:
service query: <query>
intent category: <category>

After the example pairs, I am going to provide another customer service query and I want you to classify the label of it that must be one among the intent categories provided in the examples. Give only the category, and no extra commentary, formatting, or chattiness.

{EXAMPLES}

{TARGET_QUERY})TPL",
        "service query: {input}\nintent category: {output}");

    add("dialogre",
        R"TPL(I am going to give you one or more examples of the dialogue, the list of entity pairs within it, and their corresponding relation types.

The examples will be written as the following format:
Dialogue: <dialogue>
The list of k entity pairs are (<entity 1>, <entity 2>), ...
The k respective relations between each entity pair are: <relation>, ...

After the examples, I am going to provide another dialogue along with its associated entity pairs, and I want you to classify their corresponding relation types that must be one among the relation types provided in the examples. Give only the relations, and no extra commentary, formatting, or chattiness.

{EXAMPLES}

{TARGET_QUERY})TPL",
        "Dialogue: {input}\nThe k respective relations between each entity pair are: {output}");

    add("discovery",
        R"TPL(I am going to give you one or more example pairs of two sentences and the conjunction word between them.

The pairs will be written as the following format:
<sentence 1> ( ) <sentence 2>
the most suitable conjunction word in the previous ( ) is <conjunction word>

After the example pairs, I am going to provide another two sentences and I want you to classify the conjunction word between them that must be one among the conjunction words provided in the examples. Give only the conjunction word, and no extra commentary, formatting, or chattiness.

{EXAMPLES}

{TARGET_QUERY})TPL",
        "{input}\nthe most suitable conjunction word in the previous ( ) is {output}");

    add("fewnerd",
        R"TPL(I am going to give you one or more examples of the sentence, the named entities within it, and their corresponding entity types.

The examples will be written as the following format:
Sentence: <sentence>
<named entity>: <entity type>

After the example pairs, I am going to provide another comment and I want you to classify the label of it that must be one among the emotion categories provided in the examples. Give only the category, and no extra commentary, formatting, or chattiness.

{EXAMPLES}

{TARGET_QUERY})TPL",
        "Sentence: {input}\n{output}");

    add("goemotion",
        R"TPL(I am going to give you one or more example pairs of comment and its emotion category.

The pairs will be written as the following format:
comment: <comment>
emotion category: <category>

After the example pairs, I am going to provide another sentence, and I want you to classify the named entities within it and their corresponding entity types that must be one among the entity types provided in the examples. Give only the named entities and their corresponding entity types, and no extra commentary, formatting, or chattiness.

{EXAMPLES}

{TARGET_QUERY})TPL",
        "comment: {input}\nemotion category: {output}");

    return reg;
  }();
  return registry;
}

}  // namespace

const PromptTemplate& builtin_template(const std::string& template_id) {
  const auto& reg = template_registry();
  const auto it = reg.find(template_id);
  if (it == reg.end()) {
    throw Error(ErrorKind::InvalidArgument, "unknown template id: " + template_id);
  }
  return it->second;
}

std::vector<std::string> builtin_template_ids() {
  std::vector<std::string> ids;
  for (const auto& [id, tmpl] : template_registry()) ids.push_back(id);
  return ids;
}

const std::string& generation_template() {
  static const std::string tmpl =
      R"TPL(You are an expert in data augmentation. You will be provided with a series of demonstrations that show how a task is performed. Your objective is to generate a new example that closely follows the pattern, structure, and style of the demonstrations. Carefully analyze the key steps, transitions, and output style in the provided demonstrations. Then, create a new sample that maintains consistency in format and correctness while introducing variety in content.

Here are the demonstrations:

{EXAMPLES}

Now, as an expert, generate a new sample that aligns with the original demonstrations:)TPL";
  return tmpl;
}

const std::string& filtering_template() {
  static const std::string tmpl =
      R"TPL(You are an expert in assessing data quality. Given the original set of samples, your task is to carefully evaluate the provided sample in comparison to the original samples. Based on your expertise, determine whether the provided sample is of high quality, meeting or exceeding the standards set by the original set.

Here are the original samples:
{EXAMPLES}

Now, as an expert, evaluate the provided sample:
{GENERATED_SAMPLE}

Please provide only a single numerical rating (1, 2, 3, 4, or 5) based on the quality of the sample, without any additional commentary, formatting, or chattiness.)TPL";
  return tmpl;
}

const std::string& difficulty_template() {
  static const std::string tmpl =
      R"TPL(You are an expert in assessing sample difficulty. Your task is to carefully evaluate the provided sample and judge how challenging it is to produce its output from its input.

Now, as an expert, evaluate the provided sample:
{TARGET_SAMPLE}

Please provide only a single numerical rating (1, 2, 3, 4, or 5) based on the difficulty of this sample for the task, without any additional commentary, formatting, or chattiness.)TPL";
  return tmpl;
}

PromptTemplate load_template_dir(const std::string& dir,
                                 const std::string& template_id) {
  auto read_file = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw Error(ErrorKind::Io, "cannot open template file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    if (!text.empty() && text.back() == '\n') text.pop_back();
    return text;
  };
  PromptTemplate tmpl;
  tmpl.template_id = template_id;
  tmpl.body = read_file(dir + "/" + template_id + ".body.txt");
  tmpl.example_format = read_file(dir + "/" + template_id + ".example.txt");
  validate_template(tmpl);
  return tmpl;
}

}  // namespace icl
