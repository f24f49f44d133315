#pragma once

#include <string_view>

namespace bsm::test {

struct StemCase {
  std::string_view word;
  std::string_view stem;
};

// Expected stems from an independent implementation of the original Porter
// rules.
inline constexpr StemCase kStemCases[] = {
    {"caresses", "caress"},
    {"ponies", "poni"},
    {"ties", "ti"},
    {"caress", "caress"},
    {"cats", "cat"},
    {"feed", "feed"},
    {"agreed", "agre"},
    {"plastered", "plaster"},
    {"bled", "bled"},
    {"motoring", "motor"},
    {"sing", "sing"},
    {"conflated", "conflat"},
    {"troubled", "troubl"},
    {"sized", "size"},
    {"hopping", "hop"},
    {"tanned", "tan"},
    {"falling", "fall"},
    {"hissing", "hiss"},
    {"fizzed", "fizz"},
    {"failing", "fail"},
    {"filing", "file"},
    {"happy", "happi"},
    {"sky", "sky"},
    {"relational", "relat"},
    {"conditional", "condit"},
    {"rational", "ration"},
    {"valenci", "valenc"},
    {"hesitanci", "hesit"},
    {"digitizer", "digit"},
    {"conformabli", "conform"},
    {"radicalli", "radic"},
    {"differentli", "differ"},
    {"vileli", "vile"},
    {"analogousli", "analog"},
    {"vietnamization", "vietnam"},
    {"predication", "predic"},
    {"operator", "oper"},
    {"feudalism", "feudal"},
    {"decisiveness", "decis"},
    {"hopefulness", "hope"},
    {"callousness", "callous"},
    {"formaliti", "formal"},
    {"sensitiviti", "sensit"},
    {"sensibiliti", "sensibl"},
    {"triplicate", "triplic"},
    {"formative", "form"},
    {"formalize", "formal"},
    {"electriciti", "electr"},
    {"electrical", "electr"},
    {"hopeful", "hope"},
    {"goodness", "good"},
    {"revival", "reviv"},
    {"allowance", "allow"},
    {"inference", "infer"},
    {"airliner", "airlin"},
    {"gyroscopic", "gyroscop"},
    {"adjustable", "adjust"},
    {"defensible", "defens"},
    {"irritant", "irrit"},
    {"replacement", "replac"},
    {"adjustment", "adjust"},
    {"dependent", "depend"},
    {"adoption", "adopt"},
    {"homologou", "homolog"},
    {"communism", "commun"},
    {"activate", "activ"},
    {"angulariti", "angular"},
    {"homologous", "homolog"},
    {"effective", "effect"},
    {"bowdlerize", "bowdler"},
    {"probate", "probat"},
    {"rate", "rate"},
    {"cease", "ceas"},
    {"controll", "control"},
    {"roll", "roll"},
    {"generalizations", "gener"},
    {"oscillators", "oscil"},
    {"running", "run"},
    {"runs", "run"},
    {"ran", "ran"},
    {"throw", "throw"},
    {"throws", "throw"},
    {"throwing", "throw"},
    {"thrown", "thrown"},
    {"catch", "catch"},
    {"catches", "catch"},
    {"caught", "caught"},
    {"dance", "danc"},
    {"dancing", "danc"},
    {"danced", "danc"},
    {"happiness", "happi"},
    {"kites", "kite"},
    {"skiers", "skier"},
    {"skiing", "ski"},
    {"goggles", "goggl"},
    {"singer", "singer"},
    {"singing", "sing"},
    {"lights", "light"},
    {"drums", "drum"},
    {"cutting", "cut"},
    {"knives", "knive"},
    {"onions", "onion"},
    {"chefs", "chef"},
};

struct PresenceCase {
  std::string_view concept_word;
  std::string_view token;
  bool present;
};

// Concept word, story token, and whether the token counts as the concept.
inline constexpr PresenceCase kPresenceCases[] = {
    {"run", "running", true},
    {"run", "runs", true},
    {"run", "ran", false},
    {"throw", "throwing", true},
    {"throw", "thrown", false},
    {"catch", "catches", true},
    {"catch", "caught", false},
    {"dance", "dancing", true},
    {"dance", "danced", true},
    {"dance", "dancer", false},
    {"happy", "happiness", true},
    {"happy", "happily", false},
    {"kite", "kites", true},
    {"ski", "skiers", false},
    {"ski", "skiing", true},
    {"ski", "skis", true},
    {"goggle", "goggles", true},
    {"sing", "singer", false},
    {"sing", "singing", true},
    {"sing", "sang", false},
    {"light", "lights", true},
    {"light", "lighting", true},
    {"light", "lightly", false},
    {"drum", "drums", true},
    {"drum", "drummer", false},
    {"cut", "cutting", true},
    {"cut", "cuts", true},
    {"knife", "knives", false},
    {"onion", "onions", true},
    {"chef", "chefs", true},
    {"relate", "relational", true},
    {"condition", "conditional", true},
    {"ration", "rational", true},
    {"digit", "digitizer", true},
    {"conform", "conformable", true},
    {"radical", "radically", true},
    {"differ", "different", true},
    {"analogy", "analogous", false},
    {"predicate", "predication", true},
    {"operate", "operator", true},
    {"feudal", "feudalism", true},
    {"decide", "decisive", false},
    {"hope", "hopeful", true},
    {"hope", "hopefulness", true},
    {"formal", "formality", true},
    {"sensitive", "sensitivity", true},
    {"electric", "electrical", true},
    {"electric", "electricity", true},
    {"good", "goodness", true},
    {"revive", "revival", true},
    {"allow", "allowance", true},
    {"infer", "inference", true},
    {"adjust", "adjustable", true},
    {"adjust", "adjustment", true},
    {"depend", "dependent", true},
    {"adopt", "adoption", true},
    {"active", "activate", true},
    {"effect", "effective", true},
    {"generalize", "generalization", true},
    {"oscillate", "oscillators", true},
    {"cease", "ceased", true},
    {"control", "controlling", true},
    {"roll", "rolling", true},
    {"agree", "agreed", true},
    {"plaster", "plastered", true},
    {"trouble", "troubled", true},
    {"size", "sized", true},
    {"hop", "hopping", true},
    {"tan", "tanned", true},
    {"fall", "falling", true},
    {"fail", "failing", true},
    {"file", "filing", true},
    {"sky", "skies", false},
    {"pony", "ponies", true},
    {"cat", "cats", true},
    {"feed", "fed", false},
    {"mountain", "mountains", true},
    {"snow", "snowing", true},
    {"lift", "lifted", true},
    {"stage", "staging", true},
    {"crowd", "crowded", true},
    {"beach", "beaches", true},
    {"wind", "windy", false},
    {"wind", "winding", true},
    {"kitchen", "kitchens", true},
    {"pan", "panned", true},
    {"frisbee", "frisbees", true},
    {"dog", "dogs", true},
    {"guitar", "guitarist", false},
    {"university", "universe", true},
};

}  // namespace bsm::test
