#include "rolefocus/toy_trainer.hpp"

#include "rolefocus/grouping.hpp"
#include "rolefocus/random.hpp"

#include <algorithm>

namespace rolefocus {

namespace {

struct CharacterSpec {
    const char* id;
    const char* profile;
};

struct PromptSpec {
    const char* character;
    std::vector<std::pair<FocusDimension, const char*>> foci;
    FocusDimension wrong;  // a plausible but incorrect dimension
    const char* thought;
    const char* reference;
    const char* near_reference;
    const char* paraphrase;
    const char* off_reference;
};

const std::vector<CharacterSpec>& characters() {
    static const std::vector<CharacterSpec> c = {
        {"marta", "Marta keeps the northern lighthouse. Gruff and weathered, she hides a kind heart behind short answers "
                  "and has watched the sea for forty winters."},
        {"vex", "Vex is a cocky star pilot who boasts about impossible escapes, hates rules, and calls every ship sweetheart."},
        {"alaric", "Alaric is the pompous court wizard. He speaks in long formal sentences and is obsessed with his own "
                   "reputation and his tower library."},
        {"ping", "Ping sells noodles from a cart at the night market. Cheerful, chatty, remembers every regular customer "
                 "and their favourite broth."},
        {"unit7", "Unit-7 is a museum guide robot. Literal minded, precise, polite, and it quotes exhibit catalogue numbers."},
        {"hollis", "Hollis is a retired detective with a dry wit who notices small details and distrusts easy answers."},
    };
    return c;
}

const std::vector<PromptSpec>& prompts() {
    using F = FocusDimension;
    static const std::vector<PromptSpec> p = {
        {"marta", {{F::Knowledge, "forty winters at the lighthouse"}}, F::Safety,
         "They ask how long I have been here.",
         "Forty winters now, and the lamp has not gone dark once.",
         "Forty winters now, and the lamp has never gone out once.",
         "I have tended this light for four decades without a single failure.",
         "The fish market opens early on Tuesdays."},
        {"marta", {{F::Emotion, "hidden warmth"}, {F::Style, "short gruff sentences"}}, F::Worldview,
         "A stranger thanks me for the rescue.",
         "No need for thanks. Just wear a jacket next time, the sea is cold.",
         "No need for thanks. Just bring a jacket next time, the water is cold.",
         "Do not mention it, but please dress warmer before you sail again.",
         "My favourite colour has always been green."},
        {"vex", {{F::Style, "boastful and playful"}}, F::Knowledge,
         "They doubt I can outrun the patrol.",
         "Outrun them? Sweetheart, I have lost better patrols in an asteroid field.",
         "Outrun them? Sweetheart, I have lost faster patrols in an asteroid field.",
         "Of course I can escape them, I have done harder things before.",
         "The recipe needs two cups of flour."},
        {"vex", {{F::Worldview, "rules are for other pilots"}, {F::Engagement, "dare the user"}}, F::Safety,
         "The user reminds me about flight regulations.",
         "Regulations are for pilots who never leave the dock. Want to see what this ship can really do?",
         "Regulations are for pilots who never leave the hangar. Want to see what this ship can truly do?",
         "I ignore rules because they slow me down, come fly with me.",
         "Please water the plants on Sunday."},
        {"alaric", {{F::Knowledge, "the tower library"}}, F::Memory,
         "An apprentice asks where the old spellbooks are kept.",
         "The ancient tomes rest in my tower library, third shelf, behind the enchanted glass.",
         "The ancient tomes rest in my tower library, second shelf, behind the enchanted glass.",
         "You will find the old books upstairs in my collection.",
         "The train to the coast leaves at noon."},
        {"alaric", {{F::Style, "formal and pompous"}, {F::HumanLike, "sighs at the question"}}, F::Empathetic,
         "Someone asks whether I can do a simple card trick.",
         "I, the Royal Archmage, do not perform card tricks for the amusement of commoners.",
         "I, the Royal Archmage, shall not perform card tricks for the entertainment of commoners.",
         "Card tricks are beneath a wizard of my standing.",
         "Bananas are rich in potassium."},
        {"ping", {{F::Memory, "regular customer likes spicy broth"}}, F::Knowledge,
         "A regular customer sits down at the cart.",
         "Welcome back! Extra spicy broth with double noodles, just like always?",
         "Welcome back! Extra spicy broth with extra noodles, just like usual?",
         "Good to see you again, shall I make your usual bowl?",
         "The bridge was painted blue last year."},
        {"ping", {{F::Engagement, "invite them to try a new dish"}, {F::Emotion, "cheerful"}}, F::Safety,
         "A tired student looks at the menu for a long time.",
         "Try the sesame noodles tonight, they are new and they will cheer you right up!",
         "Try the sesame noodles today, they are new and they will cheer you up!",
         "I recommend our newest dish, it tastes wonderful and it is comforting.",
         "Mountains are formed by tectonic plates."},
        {"unit7", {{F::Knowledge, "exhibit catalogue number 114"}}, F::Extension,
         "A visitor asks about the bronze helmet.",
         "This bronze helmet is catalogue item 114, recovered from a river burial in the year 1902.",
         "This bronze helmet is catalogue item 114, recovered from a river grave in the year 1902.",
         "The helmet was found in a river more than a century ago.",
         "My shoes are too tight today."},
        {"unit7", {{F::Safety, "do not touch the exhibits"}, {F::Style, "literal and polite"}}, F::Emotion,
         "A child reaches toward the glass case.",
         "Please do not touch the exhibit. Fingerprints damage the glass and sadden the curator.",
         "Please do not touch the display. Fingerprints damage the glass and sadden the curator.",
         "Kindly keep your hands away from the case, it is fragile.",
         "The concert was cancelled because of rain."},
        {"hollis", {{F::Knowledge, "noticed the muddy boots"}}, F::Memory,
         "The user claims they were home all evening.",
         "Home all evening, with fresh mud on your boots? Try again.",
         "Home all evening, with wet mud on your boots? Try again.",
         "Your boots tell a different story than you do.",
         "Lemons grow best in warm climates."},
        {"hollis", {{F::Worldview, "distrusts easy answers"}, {F::Empathetic, "understands grief"}}, F::Style,
         "A widow says the case is finally closed.",
         "Closed files have a way of opening again. Still, I am sorry for your loss.",
         "Closed files have a habit of opening again. Still, I am sorry for your loss.",
         "Cases rarely stay shut, but I understand how hard this is for you.",
         "The library closes at nine on weekdays."},
    };
    return p;
}

std::string render(const std::string& thought, const std::vector<FocusDeclaration>& foci, const std::string& answer) {
    ParsedTrajectory t;
    t.think_text = thought;
    for (auto f : foci) {
        f.position = thought.size();
        t.foci.push_back(std::move(f));
    }
    t.answer = answer;
    t.format_valid = true;
    return render_trajectory(t);
}

std::string first_word(const char* s) {
    std::string w(s);
    return w.substr(0, w.find(' '));
}

}  // namespace

void ToyTask::validate() const {
    if (prompts.empty()) throw std::invalid_argument("toy task has no prompts");
    if (candidate_pool.size() != prompts.size()) throw std::invalid_argument("one candidate pool per prompt required");
    const std::size_t m = candidates_per_prompt();
    if (m == 0) throw std::invalid_argument("candidate pools must be non-empty");
    for (std::size_t p = 0; p < prompts.size(); ++p) {
        if (candidate_pool[p].size() != m) throw std::invalid_argument("candidate pools must share one size");
        prompts[p].gold.validate();
        bool hit = false, miss = false;
        for (const auto& raw : candidate_pool[p]) {
            (score_focus(parse_trajectory(raw), prompts[p].gold) == 1.0 ? hit : miss) = true;
        }
        if (!hit || !miss) {
            throw std::invalid_argument("pool for " + prompts[p].prompt_id + " needs focus=1 and focus=0 candidates");
        }
    }
}

ToyTask default_toy_task(std::uint64_t seed) {
    ToyTask task;
    task.seed = seed;

    std::vector<CharacterProfile> profiles;
    for (const auto& c : characters()) profiles.push_back({c.id, c.profile, hash_embed(c.profile)});
    const GroupModel groups = fit_kmeans(profiles, 3, seed);

    Rng rng(seed);
    std::size_t index = 0;
    for (const auto& spec : prompts()) {
        ToyPrompt prompt;
        prompt.prompt_id = "p" + std::to_string(index++);
        prompt.character_id = spec.character;
        prompt.group = *groups.group_of(spec.character);
        prompt.gold.character_id = spec.character;
        prompt.gold.reference_response = spec.reference;

        std::vector<FocusDeclaration> exact, partial, wrong, extra;
        for (const auto& [dim, attr] : spec.foci) {
            prompt.gold.gold_foci.insert(dim);
            prompt.gold.gold_attrs[dim] = attr;
            exact.push_back({dim, attr, 0});
            partial.push_back({dim, first_word(attr), 0});
        }
        wrong.push_back({spec.wrong, spec.foci.front().second, 0});
        extra = exact;
        extra.push_back({spec.wrong, "something else", 0});

        const std::string thought = spec.thought;
        std::vector<std::string> pool = {
            render(thought, exact, spec.near_reference),
            render(thought, partial, spec.near_reference),
            render(thought, exact, spec.off_reference),
            render(thought, wrong, spec.near_reference),
            render(thought, wrong, spec.off_reference),
            "<think>" + thought + "<focus>" + std::string(to_string(spec.foci.front().first)) + "</focus><focus_attr>" +
                spec.foci.front().second + "</focus_attr>\\boxed{" + spec.near_reference + "}",
            render(thought, extra, spec.near_reference),
            render(thought, {}, spec.paraphrase),
        };
        for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.below(i)]);

        task.prompts.push_back(std::move(prompt));
        task.candidate_pool.push_back(std::move(pool));
    }
    return task;
}

codec::json to_json(const ToyTask& task) {
    codec::json j;
    j["seed"] = task.seed;
    j["prompts"] = codec::json::array();
    for (std::size_t p = 0; p < task.prompts.size(); ++p) {
        const auto& prompt = task.prompts[p];
        codec::json pj;
        pj["prompt_id"] = prompt.prompt_id;
        pj["character_id"] = prompt.character_id;
        pj["group"] = prompt.group;
        pj["gold"] = codec::to_json(prompt.gold);
        pj["candidates"] = task.candidate_pool[p];
        j["prompts"].push_back(std::move(pj));
    }
    return j;
}

ToyTask toy_task_from_json(const codec::json& j) {
    ToyTask task;
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw codec::SchemaError("task.seed must be a non-negative integer");
        task.seed = j["seed"].get<std::uint64_t>();
    }
    const auto& prompts = codec::require(j, "prompts", "task");
    if (!prompts.is_array()) throw codec::SchemaError("task.prompts must be an array");
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        const std::string path = "task.prompts[" + std::to_string(i) + "]";
        const auto& pj = prompts[i];
        ToyPrompt prompt;
        prompt.prompt_id = codec::require_string(pj, "prompt_id", path);
        prompt.character_id = codec::require_string(pj, "character_id", path);
        if (pj.contains("group")) {
            if (!pj["group"].is_number_unsigned()) throw codec::SchemaError(path + ".group must be a non-negative integer");
            prompt.group = pj["group"].get<std::size_t>();
        }
        prompt.gold = codec::gold_from_json(codec::require(pj, "gold", path), path + ".gold");
        const auto& cands = codec::require(pj, "candidates", path);
        if (!cands.is_array()) throw codec::SchemaError(path + ".candidates must be an array");
        std::vector<std::string> pool;
        for (const auto& c : cands) {
            if (!c.is_string()) throw codec::SchemaError(path + ".candidates must hold strings");
            pool.push_back(c.get<std::string>());
        }
        task.prompts.push_back(std::move(prompt));
        task.candidate_pool.push_back(std::move(pool));
    }
    try {
        task.validate();
    } catch (const std::invalid_argument& e) {
        throw codec::SchemaError(std::string("task: ") + e.what());
    }
    return task;
}

}  // namespace rolefocus
