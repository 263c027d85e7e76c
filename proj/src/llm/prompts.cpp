#include "sqlgen/llm/prompts.hpp"

#include <algorithm>
#include <cctype>

namespace sqlgen {

namespace {

constexpr std::string_view kTempGen = R"(You are an agent expert in data science and SQL.

Your are tasked with increasing the complexity of a given SQL query template by inspiring from a sample tutorial document for {DIALECT} SQL.

A query template is defined as a SQL query with placeholders for columns, tables, and literals. For each template, you will be provided with:
1. SQL keywords and functions.
2. column or alias.column which is a placeholder for a column name.
3. table which is a placeholder for a table name.
4. literal which is a placeholder for a literal value that can be a string, number, or date.

Next you will be provided with a tutorial doc for {DIALECT} SQL and a SQL query template. You have to increase the complexity of the query template by adding more SQL keywords and functions inspired from the tutorial doc.

Tutorial:
{TUTORIAL}

Query template:
{QUERY_TEMPLATE}

Your response should be a valid {DIALECT} SQL template with column, table, and literal placeholders. Do not fill the placeholders.

Your response should be only a valid JSON object as follows without any additional text:
{{
    reasoning: Your step by step reasoning for increasing the complexity of the query template by using the tutorial doc.,
    query_template: A valid SQL query template with placeholders
}}
)";

constexpr std::string_view kGen = R"(You are an agent expert in data science and SQL.

You are provided with a database schema together with a {DIALECT} SQL template with placeholders.
Your job is to create synthetic data for training a Text-to-SQL model.
Having the database schema and the SQL template, you should get inspired by the SQL template to generate a business question that a user might ask from the given database.

Always make sure that the SQL query is in the correct syntax and it extracts meaningful and logical information for analysis.
The final SQL query should be a valid {DIALECT} SQL query without any placeholders.
Make any necessary changes to the SQL template to fit the database schema. The SQL query should be able to answer the business question.
You will be penalized for useless or meaningless queries.
The question should be generated as if it is asked by a user who do not know the database schema and it should be clear and concise.
You don't have to use all of the keywords in the SQL template, but you should use at least some of them that are relevant to the business question.
Make sure all of the conditions are correct, specificallty when you are using operators, make sure types are compatible.
All of the conditions in the SQL query should be explicitly mention in the question and avoid unnecessary conditions.
Question shouldn't be too simple or too complex. It should be meaningful and exact without any ambiguous terms.

Datbase schema:
{DATABASE_SCHEMA}

{DIALECT} SQL template to get inspired by:
{SQL_TEMPLATE}

Thank step by step about how to effectively generate a meaningful business question from the SQL template and the database schema.
{{
    question: The bussiness question that a user might from the given database and the answer expects a SQL query similar to the SQL template provided.,
    sql_query: A valid {DIALECT} SQL query that answers the business question.
}}
)";

constexpr std::string_view kQuality = R"(You are a meticulous data quality assurance professional.

Your job is to ensure that a dataset has high quality since it is going to be used for training models.
You are presented with a database schema and a {DIALECT} SQL query, its results, and a question.
If the pair needs fixing, you should fix the question or SQL query to make it acceptable.

You have to make sure the following items are satisfied:
1. Question should match the {DIALECT} SQL query, and it shouldn't be ambiguous. The question should be asked as if a non-technical person without access to the database is asking it.
2. The SQL query should exactly answer what is mentioned in the question, without any additional or irrelevant information.

If question is not answerable or is ambiguous, change the question based on the database schema, then answer the new question with a new SQL query.
If SQL query is not correct, fix the SQL query based on the database schema, then answer the question with the fixed SQL query.

DATABASE_SCHEMA:
{DATABASE_SCHEMA}
Question:
{QUESTION}
{DIALECT} SQL Query:
{SQL_QUERY}
{DIALECT} SQL Query Result:
{SQL_QUERY_RESULT}
Your response should be only a valid JSON object as follows without any additional text:
{{
    reasoning: Your step by step reasoning for deciding if the question or SQL query needs fixing.
    fixing_needed: YES or NO,
    fixed_question: If the question is not acceptable, provide a fixed version of the question.,
    fixed_sql_query: If the SQL query is not acceptable, provide a fixed version of the SQL query.
}}
)";

bool slot_char(char c) { return std::isupper(static_cast<unsigned char>(c)) || c == '_'; }

// Calls on_text / on_slot for each part of the body.
template <typename Text, typename Slot>
void scan(std::string_view body, Text&& on_text, Slot&& on_slot) {
  std::size_t i = 0;
  while (i < body.size()) {
    char c = body[i];
    if ((c == '{' || c == '}') && i + 1 < body.size() && body[i + 1] == c) {
      on_text(std::string_view(&body[i], 1));
      i += 2;
      continue;
    }
    if (c == '{') {
      auto close = body.find('}', i + 1);
      if (close != std::string_view::npos && close > i + 1) {
        auto name = body.substr(i + 1, close - i - 1);
        if (std::all_of(name.begin(), name.end(), slot_char)) {
          on_slot(name);
          i = close + 1;
          continue;
        }
      }
    }
    on_text(body.substr(i, 1));
    ++i;
  }
}

}  // namespace

std::vector<std::string> PromptTemplate::slots() const {
  std::vector<std::string> out;
  scan(
      body, [](std::string_view) {},
      [&](std::string_view name) {
        if (std::find(out.begin(), out.end(), name) == out.end()) out.emplace_back(name);
      });
  return out;
}

const PromptTemplate& builtin_prompt(PromptName name) {
  static const PromptTemplate tempgen{"P_TempGen", std::string(kTempGen)};
  static const PromptTemplate gen{"P_Gen", std::string(kGen)};
  static const PromptTemplate quality{"P_Quality", std::string(kQuality)};
  switch (name) {
    case PromptName::kTempGen:
      return tempgen;
    case PromptName::kGen:
      return gen;
    case PromptName::kQuality:
      return quality;
  }
  return tempgen;
}

std::string render_prompt(const PromptTemplate& tpl, const PromptBindings& bindings) {
  for (const auto& slot : tpl.slots()) {
    if (!bindings.count(slot)) throw MissingSlot(slot);
  }
  std::string out;
  out.reserve(tpl.body.size() * 2);
  scan(
      tpl.body, [&](std::string_view text) { out.append(text); },
      [&](std::string_view name) { out.append(bindings.at(std::string(name))); });
  return out;
}

}  // namespace sqlgen
