//! Circles, stars and associations: the ball and person diagrams built by hand.

use topoflow::model::Model;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut m = Model::new();
    let balls = m.add_node("Balls", None)?;
    let blue = m.add_circle(balls, "blue")?;
    let green = m.add_circle(balls, "green")?;
    for (name, circle) in [
        ("blue-ball-1", blue),
        ("blue-ball-2", blue),
        ("green-ball-1", green),
    ] {
        let ball = m.add_node(name, None)?;
        m.place_star(ball.into(), circle)?;
    }

    // One identity, many placements.
    let john = m.add_node("John", None)?;
    let person = m.add_node("Person", None)?;
    m.set_attribute(person, "name", "text")?;
    let persons = m.add_circle(person, "Person")?;
    let students = m.add_circle(person, "Student")?;
    let js = m.place_star(john.into(), persons)?;
    m.place_star(john.into(), students)?;

    let lesson = m.add_node("Lesson", None)?;
    let lessons = m.add_circle(lesson, "Lesson")?;
    let algebra = m.add_node("Algebra", None)?;
    let ls = m.place_star(algebra.into(), lessons)?;
    let attends = m.add_association(persons, lessons)?;
    m.instantiate_association(attends, js, ls)?;

    for c in [blue, green] {
        let names: Vec<String> = m
            .members(c)?
            .into_iter()
            .map(|i| m.identity_node(i).map(|n| n.name.clone()))
            .collect::<Result<_, _>>()?;
        println!("{}: {}", m.circle(c)?.name, names.join(", "));
    }
    println!(
        "John is placed in {} circles",
        m.placements(john.into())?.len()
    );

    // Deleting the Person circle takes John's star and the link along.
    let removed = m.delete(persons.0)?;
    println!("deleting Person removed ids {removed:?}");
    m.check_integrity()?;
    Ok(())
}
