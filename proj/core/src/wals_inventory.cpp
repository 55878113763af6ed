#include "langdist/typology.hpp"

namespace langdist::typology {

// WALS morphosyntactic features with at least one defined value among the
// studied languages. Counts: languages with a defined value among the 23
// regressor-training languages / among all 28 including the 5 held-out
// targets.
const std::vector<FeatureInfo>& default_inventory() {
  static const std::vector<FeatureInfo> kInventory = {
      {"20A", "Fusion of Selected Inflectional Formatives", 15, 16},
      {"21A", "Exponence of Selected Inflectional Formatives", 15, 16},
      {"21B", "Exponence of Tense-Aspect-Mood Inflection", 15, 16},
      {"22A", "Inflectional Synthesis of the Verb", 15, 16},
      {"23A", "Locus of Marking in the Clause", 15, 16},
      {"24A", "Locus of Marking in Possessive Noun Phrases", 15, 16},
      {"25A", "Locus of Marking: Whole-language Typology", 15, 16},
      {"25B", "Zero Marking of A and P Arguments", 15, 16},
      {"26A", "Prefixing vs. Suffixing in Inflectional Morphology", 23, 27},
      {"27A", "Reduplication", 17, 20},
      {"28A", "Case Syncretism", 16, 17},
      {"29A", "Syncretism in Verbal Person/Number Marking", 16, 17},
      {"30A", "Number of Genders", 14, 16},
      {"31A", "Sex-based and Non-sex-based Gender Systems", 14, 16},
      {"32A", "Systems of Gender Assignment", 14, 16},
      {"33A", "Coding of Nominal Plurality", 23, 27},
      {"34A", "Occurrence of Nominal Plurality", 18, 20},
      {"35A", "Plurality in Independent Personal Pronouns", 16, 18},
      {"36A", "The Associative Plural", 21, 22},
      {"37A", "Definite Articles", 22, 25},
      {"38A", "Indefinite Articles", 20, 24},
      {"39A", "Inclusive/Exclusive Distinction in Independent Pronouns", 16, 17},
      {"40A", "Inclusive/Exclusive Distinction in Verbal Inflection", 16, 17},
      {"41A", "Distance Contrasts in Demonstratives", 16, 20},
      {"42A", "Pronominal and Adnominal Demonstratives", 16, 20},
      {"43A", "Third Person Pronouns and Demonstratives", 14, 15},
      {"44A", "Gender Distinctions in Independent Personal Pronouns", 19, 20},
      {"45A", "Politeness Distinctions in Pronouns", 21, 24},
      {"46A", "Indefinite Pronouns", 23, 25},
      {"47A", "Intensifiers and Reflexive Pronouns", 22, 25},
      {"48A", "Person Marking on Adpositions", 19, 20},
      {"49A", "Number of Cases", 21, 24},
      {"50A", "Asymmetrical Case-Marking", 21, 24},
      {"51A", "Position of Case Affixes", 23, 27},
      {"52A", "Comitatives and Instrumentals", 20, 24},
      {"53A", "Ordinal Numerals", 23, 27},
      {"54A", "Distributive Numerals", 20, 23},
      {"55A", "Numeral Classifiers", 15, 16},
      {"56A", "Conjunctions and Universal Quantifiers", 12, 14},
      {"57A", "Position of Pronominal Possessive Affixes", 18, 20},
      {"58A", "Obligatory Possessive Inflection", 15, 16},
      {"58B", "Number of Possessive Nouns", 15, 16},
      {"59A", "Possessive Classification", 15, 16},
      {"60A", "Genitives, Adjectives and Relative Clauses", 11, 12},
      {"61A", "Adjectives without Nouns", 13, 14},
      {"62A", "Action Nominal Constructions", 19, 21},
      {"63A", "Noun Phrase Conjunction", 20, 22},
      {"64A", "Nominal and Verbal Conjunction", 17, 19},
      {"65A", "Perfective/Imperfective Aspect", 19, 21},
      {"66A", "The Past Tense", 19, 21},
      {"67A", "The Future Tense", 19, 21},
      {"68A", "The Perfect", 19, 21},
      {"69A", "Position of Tense-Aspect Affixes", 23, 27},
      {"70A", "The Morphological Imperative", 23, 27},
      {"71A", "The Prohibitive", 23, 27},
      {"72A", "Imperative-Hortative Systems", 23, 26},
      {"73A", "The Optative", 18, 21},
      {"74A", "Situational Possibility", 21, 24},
      {"75A", "Epistemic Possibility", 21, 24},
      {"76A", "Overlap between Situational and Epistemic Modal Marking", 21, 24},
      {"77A", "Semantic Distinctions of Evidentiality", 20, 22},
      {"78A", "Coding of Evidentiality", 20, 22},
      {"79A", "Suppletion According to Tense and Aspect", 19, 21},
      {"79B", "Suppletion in Imperatives and Hortatives", 19, 21},
      {"80A", "Verbal Number and Suppletion", 19, 21},
      {"81A", "Order of Subject, Object and Verb", 23, 28},
      {"82A", "Order of Subject and Verb", 23, 28},
      {"83A", "Order of Object and Verb", 23, 28},
      {"84A", "Order of Object, Oblique, and Verb", 12, 13},
      {"85A", "Order of Adposition and Noun Phrase", 23, 28},
      {"86A", "Order of Genitive and Noun", 23, 28},
      {"87A", "Order of Adjective and Noun", 23, 28},
      {"88A", "Order of Demonstrative and Noun", 23, 28},
      {"89A", "Order of Numeral and Noun", 22, 27},
      {"90A", "Order of Relative Clause and Noun", 23, 28},
      {"91A", "Order of Degree Word and Adjective", 22, 25},
      {"92A", "Position of Polar Question Particles", 23, 27},
      {"93A", "Position of Interrogative Phrases in Content Questions", 20, 24},
      {"94A", "Order of Adverbial Subordinator and Clause", 21, 25},
      {"98A", "Alignment of Case Marking of Full Noun Phrases", 16, 17},
      {"99A", "Alignment of Case Marking of Pronouns", 16, 17},
      {"100A", "Alignment of Verbal Person Marking", 19, 20},
      {"101A", "Expression of Pronominal Subjects", 21, 24},
      {"102A", "Verbal Person Marking", 19, 20},
      {"103A", "Third Person Zero of Verbal Person Marking", 19, 20},
      {"104A", "Order of Person Markers on the Verb", 19, 20},
      {"105A", "Ditransitive Constructions: The Verb 'Give'", 17, 19},
      {"106A", "Reciprocal Constructions", 17, 18},
      {"107A", "Passive Constructions", 19, 20},
      {"108A", "Antipassive Constructions", 16, 18},
      {"108B", "Productivity of the Antipassive Construction", 16, 18},
      {"109A", "Applicative Constructions", 16, 18},
      {"109B", "Other Roles of Applied Objects", 16, 18},
      {"110A", "Periphrastic Causative Constructions", 13, 15},
      {"111A", "Nonperiphrastic Causative Constructions", 16, 18},
      {"112A", "Negative Morphemes", 23, 27},
      {"113A", "Symmetric and Asymmetric Standard Negation", 17, 18},
      {"114A", "Subtypes of Asymmetric Standard Negation", 17, 18},
      {"115A", "Negative Indefinite Pronouns and Predicate Negation", 22, 25},
      {"116A", "Polar Questions", 23, 28},
      {"117A", "Predicative Possession", 17, 20},
      {"118A", "Predicative Adjectives", 20, 23},
      {"119A", "Nominal and Locational Predication", 20, 23},
      {"120A", "Zero Copula for Predicate Nominals", 20, 23},
      {"121A", "Comparative Constructions", 15, 17},
      {"122A", "Relativization on Subjects", 18, 19},
      {"123A", "Relativization on Obliques", 18, 19},
      {"124A", "'Want' Complement Subjects", 18, 19},
      {"125A", "Purpose Clauses", 15, 17},
      {"126A", "'When' Clauses", 16, 18},
      {"127A", "Reason Clauses", 16, 18},
      {"128A", "Utterance Complement Clauses", 15, 17},
      {"143A", "Order of Negative Morpheme and Verb", 23, 28},
      {"143B", "Obligatory Double Negation", 23, 28},
      {"144A", "Position of Negative Word With Respect to Subject, Object, and Verb", 23, 28},
      {"144B", "Position of negative words relative to beginning and end of clause and with respect to adjacency to verb", 23, 28},
  };
  return kInventory;
}

}  // namespace langdist::typology
