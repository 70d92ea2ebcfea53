#include "polyg/eval/judge.hpp"

#include <random>
#include <sstream>

#include "polyg/core/random.hpp"
#include "polyg/core/text.hpp"

namespace polyg::eval {

const std::vector<std::string> kCriteria = {
    "Comprehensiveness", "Diversity", "Empowerment", "Directness",
    "Overall Winner"};

namespace {

const char* criterion_text(const std::string& name) {
    if (name == "Comprehensiveness")
        return "How much detail does the answer provide to cover all aspects "
               "and details of the question? A comprehensive answer is "
               "thorough and complete without being redundant or irrelevant.";
    if (name == "Diversity")
        return "How varied and rich is the answer in providing different "
               "perspectives and insights on the question? A diverse answer "
               "is multi-faceted, offering several viewpoints and angles.";
    if (name == "Empowerment")
        return "How well does the answer help the reader understand and make "
               "informed judgements about the topic without being misled or "
               "making fallacious assumptions?";
    if (name == "Directness")
        return "How specifically and clearly does the answer address the "
               "question? A direct answer states the answer plainly, without "
               "irrelevant or unnecessary information.";
    return "Considering the four criteria above together, which answer is "
           "the best overall?";
}

}  // namespace

Result<JudgeRequest> build_judge_request(const std::string& question,
                                         const std::vector<std::string>& answers,
                                         std::uint64_t seed) {
    if (answers.size() < 2)
        return Error{"judging needs at least two answers, got " +
                     std::to_string(answers.size())};
    if (answers.size() > 26) return Error{"too many answers to label (max 26)"};

    std::vector<std::size_t> order(answers.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(bounded_draw(rng, i + 1));
        std::swap(order[i], order[j]);
    }

    JudgeRequest req;
    req.question = question;
    req.criteria = kCriteria;
    for (std::size_t i = 0; i < order.size(); ++i)
        req.labels.emplace_back(std::string(1, static_cast<char>('A' + i)),
                                order[i]);

    std::ostringstream system;
    system << "You judge candidate answers to the same question. Evaluate "
              "them on each criterion below and pick the winners.\n\n";
    for (const auto& name : kCriteria)
        system << name << ": " << criterion_text(name) << "\n";
    system << "\nA criterion may have multiple winners when several answers "
              "are equally strong. Reply with exactly one line per "
              "criterion, in the order listed, formatted as\n"
              "<criterion>: <label>[, <label>...]\n"
              "and nothing else.";

    std::ostringstream user;
    user << "Question: " << question << "\n\n";
    for (const auto& [label, index] : req.labels)
        user << "Answer " << label << ":\n" << answers[index] << "\n\n";
    user << "Winners per criterion:";

    req.messages = {{"system", system.str()}, {"user", user.str()}};
    return req;
}

std::map<std::string, std::vector<std::size_t>> parse_judge_verdict(
    const std::string& reply, const JudgeRequest& request) {
    std::map<std::string, std::vector<std::size_t>> verdict;
    for (const auto& name : request.criteria) verdict[name];

    for (const auto& raw : split(reply, '\n')) {
        auto colon = raw.find(':');
        if (colon == std::string::npos) continue;
        std::string head = to_lower(trim(raw.substr(0, colon)));
        const std::string* criterion = nullptr;
        for (const auto& name : request.criteria) {
            if (head == to_lower(name)) {
                criterion = &name;
                break;
            }
        }
        if (!criterion) continue;

        std::vector<std::size_t> winners;
        for (const auto& token : word_tokens(raw.substr(colon + 1))) {
            if (token.size() != 1) continue;
            for (const auto& [label, index] : request.labels) {
                if (to_lower(label) == token) {
                    winners.push_back(index);
                    break;
                }
            }
        }
        verdict[*criterion] = std::move(winners);
    }
    return verdict;
}

}  // namespace polyg::eval
