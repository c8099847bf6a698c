//! Turn a task into entity terms and per-entity attribute subsets using the
//! two pre-retrieval prompts. A scripted model stands in for the LLM; the
//! exact prompts it receives are printed.
//!
//!     cargo run --example pre_retrieval_abstraction

use subgraph_rag::abstraction::build_abstraction;
use subgraph_rag::catalog::AttributeCatalog;
use subgraph_rag::llm::{ChatModel, CompletionRequest, GatewayError, Script, ScriptRule, ScriptedChat};

struct Printing(ScriptedChat);

impl ChatModel for Printing {
    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        let reply = self.0.complete(request)?;
        println!("--- prompt\n{}\n--- reply\n{reply}\n", request.last_user().unwrap_or(""));
        Ok(reply)
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let task = "Cook an egg in the pan and put it on a plate";
    let mut script = Script::default();
    script
        .push(ScriptRule::new("comma separated list of objects only", "Egg, frying pan, stove, plate."))
        .push(ScriptRule::new("about a egg are", "isCooked, temperature"))
        .push(ScriptRule::new("about a frying pan are", "temperature, isPickedUp, nonsense"))
        .push(ScriptRule::new("about a stove are", "isToggled"))
        .push(ScriptRule::new("about a plate are", "I am not sure."));
    let llm = Printing(ScriptedChat::new(script)?);

    let (abstraction, report) = build_abstraction(task, &AttributeCatalog::household(), &llm)?;
    println!("{} model calls", report.llm_calls);
    for term in &abstraction.entities {
        let attrs = abstraction.attributes_for(term);
        let shown = if attrs.is_empty() {
            "(all attributes)".to_string()
        } else {
            attrs.into_iter().collect::<Vec<_>>().join(", ")
        };
        println!("{term:>12}: {shown}");
    }
    Ok(())
}
